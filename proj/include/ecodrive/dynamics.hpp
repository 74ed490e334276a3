// Switched longitudinal dynamics of an on/off engine vehicle.
//
//   x1' = x2
//   x2' = -a (x2 - v(x1,t))^2 - c sign(x2) - g sin(theta(x1)) + u f1
//
// with u in {0, 1}. sign(0) is taken as 0 so that a coasting vehicle can
// come to rest; the integrator treats x2 = 0 with the engine off as a
// sticking state whenever friction can hold it there.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ecodrive {

enum class Engine : std::uint8_t { Off = 0, On = 1 };

inline int as_int(Engine u) { return u == Engine::On ? 1 : 0; }
inline Engine engine_from_int(int u) { return u != 0 ? Engine::On : Engine::Off; }

/// Physical constants of the vehicle. Defaults describe a light electric
/// prototype of about 93 kg.
struct VehicleParams {
  double drag = 6e-4;        // a [1/m]
  double friction = 3e-2;    // c [m/s^2]
  double gravity = 9.81;     // g [m/s^2]
  double traction = 0.20;    // f1 [m/s^2], traction force per unit mass
  double mass = 93.0;        // m [kg]
  double switch_cost = 10.0; // alpha [J], paid at every off->on transition
  // Replace -a (x2 - v)^2 by -a (x2 - v)|x2 - v| so that an overtaking
  // tailwind pushes the vehicle instead of braking it.
  bool signed_drag = false;

  /// Throws Error(Validation) when a field is non-positive or f1 <= c.
  void validate() const;
};

/// Instantaneous electrical power h(x2, u) drawn by the vehicle.
class PowerModel {
 public:
  enum class Kind { WheelPower, ConstantElectrical, Custom };

  PowerModel() = default;

  static PowerModel wheel_power();
  static PowerModel constant_electrical(double watts = 161.0);
  /// Engine-on power given by an arbitrary function of speed (engine-off
  /// power is always zero).
  static PowerModel custom(std::function<double(double)> engine_on_power);

  Kind kind() const { return kind_; }
  double constant_watts() const { return constant_watts_; }

  double operator()(double speed, Engine u, const VehicleParams& params) const;

 private:
  Kind kind_ = Kind::ConstantElectrical;
  double constant_watts_ = 161.0;
  std::function<double(double)> custom_;
};

/// One breakpoint of a track: slope holds until the next breakpoint,
/// safety speed is linearly interpolated.
struct TrackPoint {
  double s = 0.0;           // arclength [m]
  double slope = 0.0;       // theta [rad]
  double safety_speed = 0.0; // V^s [m/s]
};

class TrackProfile {
 public:
  TrackProfile() = default;
  /// Validates: nonempty, first s = 0, strictly increasing, V^s > 0.
  explicit TrackProfile(std::vector<TrackPoint> points);

  static TrackProfile flat(double length, double safety_speed);

  double length() const { return points_.back().s; }
  std::span<const TrackPoint> points() const { return points_; }

  /// Slope on the piece containing x1 (x1 = L uses the last piece).
  double slope_at(double x1) const;
  double safety_speed_at(double x1) const;
  /// Smallest breakpoint strictly greater than x1, or +inf.
  double next_breakpoint(double x1) const;
  bool contains(double x1) const { return x1 >= 0.0 && x1 <= length(); }

 private:
  std::vector<TrackPoint> points_{TrackPoint{0.0, 0.0, 1.0}};
};

/// Wind speed along the track direction (negative = headwind), piecewise
/// constant on a rectangular (arclength, time) grid. Empty means calm.
class WindField {
 public:
  WindField() = default;
  /// `values` is row-major: values[i * times.size() + j] at (s_i, t_j).
  WindField(std::vector<double> positions, std::vector<double> times,
            std::vector<double> values);

  static WindField calm() { return {}; }
  static WindField uniform(double wind);

  bool empty() const { return values_.empty(); }
  double at(double x1, double t) const;
  double next_position_boundary(double x1) const;
  double next_time_boundary(double t) const;

  std::span<const double> positions() const { return positions_; }
  std::span<const double> times() const { return times_; }
  std::span<const double> values() const { return values_; }

 private:
  std::vector<double> positions_;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Instantaneous race state.
struct RaceState {
  double t = 0.0;      // [s]
  double x1 = 0.0;     // position [m]
  double x2 = 0.0;     // speed [m/s]
  Engine u = Engine::Off;
  long switches = 0;   // number of off->on transitions
  double energy = 0.0; // [J], switching costs included
};

/// Acceleration of the non-autonomous dynamics. Throws Error(Domain) when
/// x1 is off the track.
double acceleration(double x1, double x2, double t, Engine u,
                    const VehicleParams& params, const TrackProfile& track,
                    const WindField& wind);

/// Same law with slope and wind given directly.
double acceleration_law(double x2, Engine u, double slope, double wind,
                        const VehicleParams& params);

double power(double x2, Engine u, const PowerModel& model,
             const VehicleParams& params);

/// Autonomous slice of the dynamics with slope and wind frozen. Immutable.
class FrozenDynamics {
 public:
  /// Computes the equilibrium speeds; throws Error(InfeasibleSlice) when the
  /// engine cannot move the vehicle forward on this slice.
  FrozenDynamics(VehicleParams params, PowerModel power, double slope,
                 double wind);

  double accel(double speed, Engine u) const {
    return acceleration_law(speed, u, slope_, wind_, params_);
  }
  /// Right limit f(0+, u), the acceleration just after leaving rest.
  double accel_from_rest(Engine u) const;
  double power(double speed, Engine u) const {
    return power_(speed, u, params_);
  }

  double v_low() const { return v_low_; }
  double v_high() const { return v_high_; }
  /// True when v_low is a zero of f(., 0); false when it is the sticking
  /// point at rest.
  bool v_low_is_root() const { return v_low_is_root_; }

  const VehicleParams& params() const { return params_; }
  const PowerModel& power_model() const { return power_; }
  double slope() const { return slope_; }
  double wind() const { return wind_; }
  double switch_cost() const { return params_.switch_cost; }

 private:
  VehicleParams params_;
  PowerModel power_;
  double slope_;
  double wind_;
  double v_low_ = 0.0;
  double v_high_ = 0.0;
  bool v_low_is_root_ = false;
};

inline constexpr double kSpeedSearchMax = 100.0;  // [m/s]
inline constexpr double kRootTolerance = 1e-9;    // [m/s]

FrozenDynamics freeze(const TrackProfile& track, const WindField& wind,
                      const VehicleParams& params, const PowerModel& power,
                      double x1, double t);

struct EquilibriumSpeeds {
  double v_low;
  double v_high;
};

EquilibriumSpeeds equilibrium_speeds(const FrozenDynamics& frozen);

// ---------------------------------------------------------------------------
// Assumption verification

enum class Verdict { Pass, Fail, Indeterminate };
enum class Curvature { StrictlyConvex, StrictlyConcave, Neither };

const char* to_string(Verdict v);
const char* to_string(Curvature c);

struct AssumptionItem {
  std::string name;
  Verdict verdict = Verdict::Indeterminate;
  double witness = 0.0;  // the extreme value that decided the verdict
  std::string detail;
};

struct AssumptionReport {
  // Well-posedness: continuity, forward uniqueness.
  AssumptionItem continuity;
  AssumptionItem forward_uniqueness;
  // Physical assumptions.
  AssumptionItem engine_equilibrium;
  AssumptionItem engine_effective;
  AssumptionItem coast_limit;
  AssumptionItem power_positive;
  AssumptionItem power_nondecreasing;
  AssumptionItem switch_cost_bounded;
  AssumptionItem strict_curvature;

  double switch_cost_lhs = 0.0;
  double switch_cost_rhs = 0.0;
  Curvature curvature = Curvature::Neither;
  int curvature_grid_points = 0;

  std::vector<const AssumptionItem*> items() const;
  bool pass() const;
};

inline constexpr int kCurvatureGridPoints = 200;

AssumptionReport check_assumptions(const FrozenDynamics& frozen);

/// Sign of the second differences of `values` on a uniform grid, with the
/// strictness threshold 1e-12 * max|value|.
Curvature classify_curvature(std::span<const double> values);

// ---------------------------------------------------------------------------
// Forward integration

/// Advances the state by dt with the explicit midpoint rule. Steps are split
/// at track breakpoints and wind cell boundaries; a coasting vehicle that
/// reaches zero speed sticks there. Energy accumulates trapezoidally, the
/// switching cost is not charged here. Throws Error(Numeric) on a
/// non-finite state.
RaceState integrate(const RaceState& state, Engine u, double dt,
                    const TrackProfile& track, const WindField& wind,
                    const VehicleParams& params, const PowerModel& power);

}  // namespace ecodrive
