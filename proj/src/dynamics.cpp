#include "ecodrive/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ecodrive/error.hpp"

namespace ecodrive {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InfeasibleSlice: return "infeasible-slice";
    case ErrorKind::InvalidSegment: return "invalid-segment";
    case ErrorKind::InfeasibleCandidate: return "infeasible-candidate";
    case ErrorKind::InfeasibleTarget: return "infeasible-target";
    case ErrorKind::DivergenceRisk: return "divergence-risk";
    case ErrorKind::InvalidProfile: return "invalid-profile";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "io";
    case ErrorKind::NotApplicable: return "not-applicable";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Validation, what);
}

// Bisection on a bracket where fn(lo) > 0 >= fn(hi). Runs until the bracket
// stops shrinking, which is well below kRootTolerance for speeds < 100.
template <class Fn>
double bisect_decreasing(Fn&& fn, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fn(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

// ---------------------------------------------------------------------------

void VehicleParams::validate() const {
  require(drag > 0.0, "params: a must be > 0");
  require(friction > 0.0, "params: c must be > 0");
  require(gravity > 0.0, "params: g must be > 0");
  require(traction > 0.0, "params: f1 must be > 0");
  require(mass > 0.0, "params: m must be > 0");
  require(switch_cost > 0.0, "params: alpha must be > 0");
  require(traction > friction, "params: f1 must exceed c");
}

PowerModel PowerModel::wheel_power() {
  PowerModel p;
  p.kind_ = Kind::WheelPower;
  return p;
}

PowerModel PowerModel::constant_electrical(double watts) {
  if (!(watts > 0.0))
    throw Error(ErrorKind::Validation, "power: constant_watts must be > 0");
  PowerModel p;
  p.kind_ = Kind::ConstantElectrical;
  p.constant_watts_ = watts;
  return p;
}

PowerModel PowerModel::custom(std::function<double(double)> engine_on_power) {
  PowerModel p;
  p.kind_ = Kind::Custom;
  p.custom_ = std::move(engine_on_power);
  return p;
}

double PowerModel::operator()(double speed, Engine u,
                              const VehicleParams& params) const {
  if (u == Engine::Off) return 0.0;
  switch (kind_) {
    case Kind::WheelPower: return speed * params.mass * params.traction;
    case Kind::ConstantElectrical: return constant_watts_;
    case Kind::Custom: return custom_(speed);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

TrackProfile::TrackProfile(std::vector<TrackPoint> points)
    : points_(std::move(points)) {
  require(!points_.empty(), "track: no breakpoints");
  require(points_.front().s == 0.0, "track: first arclength must be 0");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    require(std::isfinite(p.s) && std::isfinite(p.slope) &&
                std::isfinite(p.safety_speed),
            "track: non-finite value at breakpoint " + std::to_string(i));
    require(p.safety_speed > 0.0,
            "track: safety speed must be > 0 at breakpoint " + std::to_string(i));
    if (i > 0)
      require(p.s > points_[i - 1].s,
              "track: arclengths must be strictly increasing at breakpoint " +
                  std::to_string(i));
  }
}

TrackProfile TrackProfile::flat(double length, double safety_speed) {
  if (length == 0.0) return TrackProfile({{0.0, 0.0, safety_speed}});
  return TrackProfile({{0.0, 0.0, safety_speed}, {length, 0.0, safety_speed}});
}

namespace {
// Index of the piece [s_i, s_{i+1}) containing x1; the last breakpoint maps
// to the last piece.
std::size_t piece_index(std::span<const TrackPoint> pts, double x1) {
  if (pts.size() == 1) return 0;
  auto it = std::upper_bound(pts.begin(), pts.end(), x1,
                             [](double x, const TrackPoint& p) { return x < p.s; });
  std::size_t idx = it == pts.begin() ? 0 : static_cast<std::size_t>(it - pts.begin()) - 1;
  return std::min(idx, pts.size() - 2);
}
}  // namespace

double TrackProfile::slope_at(double x1) const {
  return points_[piece_index(points_, x1)].slope;
}

double TrackProfile::safety_speed_at(double x1) const {
  if (points_.size() == 1) return points_.front().safety_speed;
  const std::size_t i = piece_index(points_, x1);
  const auto& p = points_[i];
  const auto& q = points_[i + 1];
  const double w = std::clamp((x1 - p.s) / (q.s - p.s), 0.0, 1.0);
  return p.safety_speed + w * (q.safety_speed - p.safety_speed);
}

double TrackProfile::next_breakpoint(double x1) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), x1,
                             [](double x, const TrackPoint& p) { return x < p.s; });
  return it == points_.end() ? kInf : it->s;
}

// ---------------------------------------------------------------------------

WindField::WindField(std::vector<double> positions, std::vector<double> times,
                     std::vector<double> values)
    : positions_(std::move(positions)),
      times_(std::move(times)),
      values_(std::move(values)) {
  require(!positions_.empty() && !times_.empty(), "wind: empty grid axis");
  require(values_.size() == positions_.size() * times_.size(),
          "wind: grid is not rectangular");
  for (std::size_t i = 1; i < positions_.size(); ++i)
    require(positions_[i] > positions_[i - 1],
            "wind: arclengths must be strictly increasing");
  for (std::size_t j = 1; j < times_.size(); ++j)
    require(times_[j] > times_[j - 1], "wind: times must be strictly increasing");
  for (double v : values_) require(std::isfinite(v), "wind: non-finite value");
}

WindField WindField::uniform(double wind) { return WindField({0.0}, {0.0}, {wind}); }

namespace {
std::size_t cell(std::span<const double> axis, double x) {
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  return it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
}

double next_boundary(std::span<const double> axis, double x) {
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  return it == axis.end() ? kInf : *it;
}
}  // namespace

double WindField::at(double x1, double t) const {
  if (values_.empty()) return 0.0;
  return values_[cell(positions_, x1) * times_.size() + cell(times_, t)];
}

double WindField::next_position_boundary(double x1) const {
  return next_boundary(positions_, x1);
}

double WindField::next_time_boundary(double t) const {
  return next_boundary(times_, t);
}

// ---------------------------------------------------------------------------

double acceleration_law(double x2, Engine u, double slope, double wind,
                        const VehicleParams& p) {
  const double rel = x2 - wind;
  const double drag = p.signed_drag ? p.drag * rel * std::abs(rel) : p.drag * rel * rel;
  return -drag - p.friction * sign(x2) - p.gravity * std::sin(slope) +
         (u == Engine::On ? p.traction : 0.0);
}

double acceleration(double x1, double x2, double t, Engine u,
                    const VehicleParams& params, const TrackProfile& track,
                    const WindField& wind) {
  if (!track.contains(x1))
    throw Error(ErrorKind::Domain, "acceleration: position " + std::to_string(x1) +
                                       " m is outside the track");
  return acceleration_law(x2, u, track.slope_at(x1), wind.at(x1, t), params);
}

double power(double x2, Engine u, const PowerModel& model,
             const VehicleParams& params) {
  return model(x2, u, params);
}

// ---------------------------------------------------------------------------

FrozenDynamics::FrozenDynamics(VehicleParams params, PowerModel power,
                               double slope, double wind)
    : params_(params), power_(std::move(power)), slope_(slope), wind_(wind) {
  const double rest_on = accel_from_rest(Engine::On);
  if (!(rest_on > 0.0))
    throw Error(ErrorKind::InfeasibleSlice,
                "engine cannot move the vehicle from rest (f(0+,1) = " +
                    std::to_string(rest_on) + ")");
  auto f_on = [this](double x) { return accel(x, Engine::On); };
  if (f_on(kSpeedSearchMax) >= 0.0)
    throw Error(ErrorKind::InfeasibleSlice,
                "no engine-on equilibrium below " + std::to_string(kSpeedSearchMax) +
                    " m/s");
  v_high_ = bisect_decreasing(f_on, 0.0, kSpeedSearchMax);

  if (accel_from_rest(Engine::Off) > 0.0) {
    // Coasting accelerates from rest: the mode-0 equilibrium is a true root,
    // and it lies below v_high since f(., 0) < f(., 1).
    auto f_off = [this](double x) { return accel(x, Engine::Off); };
    v_low_ = bisect_decreasing(f_off, 0.0, v_high_);
    v_low_is_root_ = true;
  } else {
    v_low_ = 0.0;
    v_low_is_root_ = false;
  }
}

double FrozenDynamics::accel_from_rest(Engine u) const {
  return accel(std::numeric_limits<double>::denorm_min(), u);
}

FrozenDynamics freeze(const TrackProfile& track, const WindField& wind,
                      const VehicleParams& params, const PowerModel& power,
                      double x1, double t) {
  if (!track.contains(x1))
    throw Error(ErrorKind::Domain,
                "freeze: position " + std::to_string(x1) + " m is outside the track");
  return FrozenDynamics(params, power, track.slope_at(x1), wind.at(x1, t));
}

EquilibriumSpeeds equilibrium_speeds(const FrozenDynamics& frozen) {
  return {frozen.v_low(), frozen.v_high()};
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kRightOfRest = std::numeric_limits<double>::denorm_min();

// Time for x1 to advance by `gap` with speed x2 and acceleration acc, or inf.
double time_to_cover(double gap, double x2, double acc) {
  if (gap <= 0.0) return 0.0;
  if (std::abs(acc) < 1e-300) return x2 > 0.0 ? gap / x2 : kInf;
  const double disc = x2 * x2 + 2.0 * acc * gap;
  if (disc < 0.0) return kInf;
  // Stable root of 0.5 acc tau^2 + x2 tau - gap = 0.
  const double q = x2 + std::sqrt(disc);
  return q > 0.0 ? 2.0 * gap / q : kInf;
}

}  // namespace

RaceState integrate(const RaceState& state, Engine u, double dt,
                    const TrackProfile& track, const WindField& wind,
                    const VehicleParams& params, const PowerModel& power_model) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Domain, "integrate: dt must be > 0");
  if (!track.contains(state.x1))
    throw Error(ErrorKind::Domain, "integrate: state is outside the track");

  const double length = track.length();
  auto accel_at = [&](double x1, double x2, double t) {
    const double pos = std::min(x1, length);
    return acceleration_law(x2, u, track.slope_at(pos), wind.at(pos, t), params);
  };

  RaceState out = state;
  out.u = u;
  double remaining = dt;
  const double min_piece = dt * 1e-9;

  for (int guard = 0; remaining > min_piece && guard < 64; ++guard) {
    if (out.x2 == 0.0) {
      // At rest the right limit f(0+, u) decides: the vehicle either leaves
      // rest or sticks (no backward motion).
      const double pos = std::min(out.x1, length);
      const double push = acceleration_law(kRightOfRest, u, track.slope_at(pos),
                                           wind.at(pos, out.t), params);
      if (push <= 0.0) {
        const double until = wind.next_time_boundary(out.t) - out.t;
        const double h = std::clamp(until, min_piece, remaining);
        out.energy += power_model(0.0, u, params) * h;
        out.t += h;
        remaining -= h;
        continue;
      }
    }

    double h = remaining;
    const double a0 = accel_at(out.x1, out.x2 == 0.0 ? kRightOfRest : out.x2, out.t);

    const double next_t = wind.next_time_boundary(out.t);
    if (next_t - out.t < h) h = next_t - out.t;
    const double next_s =
        std::min(track.next_breakpoint(out.x1), wind.next_position_boundary(out.x1));
    bool hits_position = false;
    if (std::isfinite(next_s)) {
      const double tau = time_to_cover(next_s - out.x1, out.x2, a0);
      if (tau < h) {
        h = tau;
        hits_position = true;
      }
    }
    h = std::max(h, min_piece);

    const double x2_mid = out.x2 + 0.5 * h * a0;
    const double x1_mid = out.x1 + 0.5 * h * out.x2;
    const double a_mid =
        accel_at(x1_mid, std::max(x2_mid, kRightOfRest), out.t + 0.5 * h);
    double x1_new = out.x1 + h * x2_mid;
    double x2_new = out.x2 + h * a_mid;
    double h_taken = h;

    if (x2_new < 0.0) {
      // Speed reaches zero inside the step: stop there.
      const double frac = out.x2 > 0.0 ? out.x2 / (out.x2 - x2_new) : 0.0;
      h_taken = std::max(frac * h, min_piece);
      x1_new = out.x1 + h_taken * 0.5 * out.x2;
      x2_new = 0.0;
    } else if (hits_position) {
      x1_new = std::max(x1_new, next_s);
    }

    const double e0 = power_model(out.x2, u, params);
    const double e1 = power_model(x2_new, u, params);
    out.energy += 0.5 * (e0 + e1) * h_taken;
    out.x1 = x1_new;
    out.x2 = x2_new;
    out.t += h_taken;
    remaining -= h_taken;

    if (!std::isfinite(out.x1) || !std::isfinite(out.x2) || !std::isfinite(out.energy))
      throw Error(ErrorKind::Numeric, "integrate: non-finite state");
    if (out.x1 >= length && remaining > min_piece) {
      // Past the finish line: complete the step on the last piece's law.
      const double a_end = accel_at(length, std::max(out.x2, kRightOfRest), out.t);
      const double x2_end = std::max(out.x2 + remaining * a_end, 0.0);
      out.energy += 0.5 * (power_model(out.x2, u, params) +
                           power_model(x2_end, u, params)) * remaining;
      out.x1 += remaining * 0.5 * (out.x2 + x2_end);
      out.x2 = x2_end;
      out.t += remaining;
      remaining = 0.0;
    }
  }
  if (remaining > min_piece) out.t += remaining;  // event budget exhausted
  return out;
}

}  // namespace ecodrive
