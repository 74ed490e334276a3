// Scenario files, bundled fixtures and report output.
//
// A scenario directory holds
//   params.json      a, c, g, f1, m, alpha, power_model, constant_watts,
//                    signed_drag
//   track.csv        s_m,slope_rad,vsafe_mps
//   wind.csv         s_m,t_s,v_mps (optional, absent means calm)
//   controller.json  replan/integration settings (optional)
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ecodrive/controller.hpp"
#include "ecodrive/dynamics.hpp"

namespace ecodrive {

struct Scenario {
  std::string name;
  VehicleParams params;
  PowerModel power;
  TrackProfile track;
  WindField wind;
  ControllerConfig controller;
  std::filesystem::path output_dir;

  /// Throws Error(Validation) naming the violated invariant.
  void validate() const;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Splits "key=value" into a pair; throws Error(Parse) otherwise.
std::pair<std::string, std::string> parse_override(std::string_view text);

/// Applies `key=value` overrides to params or controller settings.
void apply_overrides(Scenario& scenario, const Overrides& overrides);

// Files ---------------------------------------------------------------------

TrackProfile read_track_csv(const std::filesystem::path& path);
TrackProfile parse_track_csv(std::string_view text);
WindField read_wind_csv(const std::filesystem::path& path);
WindField parse_wind_csv(std::string_view text);

struct ParamsFile {
  VehicleParams params;
  PowerModel power;
};

ParamsFile read_params_json(const std::filesystem::path& path);
ParamsFile parse_params_json(std::string_view text);

std::string track_to_csv(const TrackProfile& track);
std::string wind_to_csv(const WindField& wind);
std::string params_to_json(const VehicleParams& params, const PowerModel& power);
std::string controller_to_json(const ControllerConfig& cfg);
ControllerConfig parse_controller_json(std::string_view text,
                                       const TrackProfile& track);

/// Loads a scenario directory, or a bundled fixture when `source` names one
/// and no such directory exists. Overrides are applied after parsing.
Scenario load_scenario(const std::string& source, const Overrides& overrides = {});

/// Writes params.json, track.csv, wind.csv (if windy), controller.json.
void dump_scenario(const Scenario& scenario, const std::filesystem::path& dir);

// Fixtures ------------------------------------------------------------------

std::vector<std::string> fixture_names();
/// flat16500, hill, gust. Throws Error(Validation) for unknown names.
Scenario make_fixture(const std::string& name);

// Reports -------------------------------------------------------------------

std::string format_number(double value);  // %.9g
std::string telemetry_csv(const RaceResult& result);
std::string speed_trace_csv(const RaceResult& result);
std::string summary_json(const RaceSummary& summary);

/// telemetry.csv, summary.json and speed_trace.csv in out_dir.
void emit_report(const RaceResult& result, const Scenario& scenario,
                 const std::filesystem::path& out_dir);

/// Output directory: $ECODRIVE_OUT if set, else `fallback`.
std::filesystem::path resolve_output_dir(const std::filesystem::path& fallback);


std::vector<TelemetryRow> parse_telemetry_csv(std::string_view text);

}  // namespace ecodrive
