// Receding-horizon race controller: every t_a seconds the band is replanned
// from the remaining distance over the remaining time, and in between the
// engine follows a hysteresis between the band edges.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecodrive/dynamics.hpp"
#include "ecodrive/optimizer.hpp"

namespace ecodrive {

struct ControllerConfig {
  double replan_interval = 3.0;  // t_a [s]
  double delta = kDefaultSafetyMargin;
  double length = 16500.0;       // L [m]
  double duration = 16500.0 / 7.0;  // T [s]
  GridSpec grid = GridSpec::coarse();
  double dt = 1e-3;              // integrator step [s]
  double overshoot_slack = 0.2;  // [m/s]
  double hard_cap_factor = 1.2;  // simulation stops at hard_cap_factor * T
  double trace_interval = 1.0;   // speed trace sampling [s]

  void validate() const;
};

// Telemetry flags, combined with '|' in a row.
namespace flags {
inline constexpr const char* kStart = "start";
inline constexpr const char* kReplan = "replan";
inline constexpr const char* kOn = "on";
inline constexpr const char* kOff = "off";
inline constexpr const char* kSafety = "safety";
inline constexpr const char* kUnreachable = "unreachable";
inline constexpr const char* kInfeasibleSlice = "infeasible_slice";
inline constexpr const char* kOvertime = "overtime";
inline constexpr const char* kStalled = "stalled";
inline constexpr const char* kFinish = "finish";
inline constexpr const char* kTimeout = "timeout";
}  // namespace flags

struct TelemetryRow {
  RaceState state;
  double va = 0.0;
  double vb = 0.0;
  std::string flag;
};

struct TraceRow {
  double t;
  double x2;
  double va;
  double vb;
  Engine u;
};

struct ReplanRecord {
  double t;
  double target;
  OscillationBand band;
};

struct RaceSummary {
  double finish_time = 0.0;
  double total_energy = 0.0;
  long switches = 0;
  std::optional<double> min_switch_gap;
  double avg_speed = 0.0;
  std::vector<std::string> flags;  // sorted, unique
};

struct RaceResult {
  std::vector<TelemetryRow> telemetry;
  std::vector<TraceRow> trace;
  std::vector<ReplanRecord> replans;
  double engine_energy = 0.0;  // integral of power over engine-on time [J]
  bool finished = false;
  RaceSummary summary;

  bool has_flag(const std::string& flag) const;
};

/// Target average speed from the remaining distance over the remaining time.
double target_speed(const RaceState& state, const ControllerConfig& cfg);

struct ReplanOutcome {
  OscillationBand band;
  double target = 0.0;
  std::vector<std::string> flags;
};

ReplanOutcome replan(const RaceState& state, const TrackProfile& track,
                     const WindField& wind, const VehicleParams& params,
                     const PowerModel& power, const ControllerConfig& cfg);

/// Hysteresis: the engine turns off at or above vb and on at or below va.
/// An off->on transition increments the switch count and charges alpha.
Engine switch_logic(RaceState& state, const OscillationBand& band,
                    double switch_cost);

RaceResult run_race(const TrackProfile& track, const WindField& wind,
                    const VehicleParams& params, const PowerModel& power,
                    const ControllerConfig& cfg);

/// Switch times (start included) recovered from the telemetry.
std::vector<double> switch_times(const RaceResult& result);

/// Minimum gap between consecutive engine switches; throws
/// Error(NotApplicable) with fewer than two switches.
double min_switch_interval(const RaceResult& result);

/// Summary recomputed from the telemetry rows alone.
RaceSummary summarize(const RaceResult& result);

}  // namespace ecodrive
