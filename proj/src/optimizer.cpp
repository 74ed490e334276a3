#include "ecodrive/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ecodrive/error.hpp"
#include "ecodrive/quadrature.hpp"

namespace ecodrive {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kUpperBracket = 1.0 - 1e-6;
constexpr int kMaxBisections = 60;

OscillationBand from_stats(double va, double vb, const quadrature::PeriodStats& st) {
  OscillationBand b;
  b.va = va;
  b.vb = vb;
  b.dwell = st.dwell;
  b.period = st.period;
  b.distance = st.distance;
  b.energy = st.energy;
  b.avg_cost = st.average_cost();
  return b;
}

// Candidate a is preferred over the incumbent b at equal cost when its lower
// speed is larger.
bool better(const OscillationBand& a, const OscillationBand& b) {
  const double tie = 1e-12 * std::abs(b.avg_cost);
  if (a.avg_cost < b.avg_cost - tie) return true;
  if (a.avg_cost > b.avg_cost + tie) return false;
  return a.va > b.va;
}

}  // namespace

GridSpec GridSpec::coarse(int p) {
  GridSpec g;
  g.offsets.clear();
  for (int i = 1; i <= p; ++i) g.offsets.push_back((p + 1 - i) / 2.0);
  return g;
}

GridSpec GridSpec::fine(double step) {
  GridSpec g = coarse();
  g.refine_step = step;
  return g;
}

std::vector<double> GridSpec::candidates(double target, double v_low) const {
  std::vector<double> out;
  for (double off : offsets) {
    const double v = target - off;
    if (v > v_low && v < target) out.push_back(v);
  }
  if (out.empty()) {
    const std::size_t p = std::max<std::size_t>(offsets.size(), 1);
    for (std::size_t k = 1; k <= p; ++k)
      out.push_back(v_low + (target - v_low) * static_cast<double>(k) / (p + 1.0));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

UpperLimit upper_limit(const FrozenDynamics& frozen, double va, double target,
                       double tol) {
  if (!(target > frozen.v_low() && target < frozen.v_high()))
    throw Error(ErrorKind::Domain, "upper_limit: target outside (V_low, V_high)");
  if (!(va > frozen.v_low() && va < target))
    throw Error(ErrorKind::Domain, "upper_limit: lower speed outside (V_low, target)");

  auto average = [&](double vb) {
    return quadrature::period_stats(frozen, va, vb).average_speed();
  };

  double hi = frozen.v_high() * kUpperBracket;
  if (average(hi) < target) {
    // Only a dwell at the equilibrium can help, and only when it is reached
    // in finite time.
    const double vh = frozen.v_high();
    const auto st = quadrature::period_stats(frozen, va, vh);
    if (!std::isfinite(st.period))
      throw Error(ErrorKind::InfeasibleCandidate,
                  "lower speed " + std::to_string(va) + " m/s cannot reach average " +
                      std::to_string(target) + " m/s");
    const double dwell = (target * st.period - st.distance) / (vh - target);
    return {vh, std::max(dwell, 0.0)};
  }

  double lo = target;
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < kMaxBisections; ++i) {
    mid = 0.5 * (lo + hi);
    const double avg = average(mid);
    if (std::abs(avg - target) <= tol) break;
    if (avg < target)
      lo = mid;
    else
      hi = mid;
  }
  return {mid, 0.0};
}

OscillationBand band_cost(const FrozenDynamics& frozen, double va, double target,
                          double tol) {
  const auto ul = upper_limit(frozen, va, target, tol);
  return from_stats(va, ul.vb, quadrature::period_stats(frozen, va, ul.vb, ul.dwell));
}

OscillationBand band_between(const FrozenDynamics& frozen, double va, double vb) {
  OscillationBand b;
  b.va = va;
  b.vb = vb;
  try {
    const auto st = quadrature::period_stats(frozen, va, vb);
    b = from_stats(va, vb, st);
    if (!std::isfinite(st.period))
      b.avg_cost = std::isfinite(st.t_up) ? 0.0 : frozen.power(vb, Engine::On);
  } catch (const Error&) {
    // Band outside [V_low, V_high]: the edges are still usable as
    // thresholds, the period statistics are not.
    b.period = b.distance = b.energy = kNaN;
    b.avg_cost = vb > frozen.v_high() ? frozen.power(frozen.v_high(), Engine::On) : 0.0;
  }
  return b;
}

OscillationBand optimal_band(const FrozenDynamics& frozen, double target,
                             double safety_speed, const GridSpec& grid,
                             double delta) {
  if (target >= frozen.v_high())
    throw Error(ErrorKind::InfeasibleTarget,
                "target " + std::to_string(target) + " m/s is not below V_high = " +
                    std::to_string(frozen.v_high()) + " m/s");
  if (!(safety_speed > 0.0))
    throw Error(ErrorKind::Domain, "optimal_band: safety speed must be > 0");

  OscillationBand best;
  if (target <= frozen.v_low()) {
    best.va = 0.0;
    best.vb = std::max(target, 0.0);
    best.period = kInf;
    best.coast = true;
  } else {
    bool found = false;
    auto consider = [&](double va) {
      try {
        const auto band = band_cost(frozen, va, target, grid.dichotomy_tol);
        if (!found || better(band, best)) best = band;
        found = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InfeasibleCandidate) throw;
      }
    };
    for (double va : grid.candidates(target, frozen.v_low())) consider(va);
    if (!found)
      throw Error(ErrorKind::InfeasibleTarget,
                  "no candidate lower speed reaches target " + std::to_string(target));

    if (grid.refine_step && *grid.refine_step > 0.0) {
      const double center = best.va;
      const int n = static_cast<int>(std::floor(grid.refine_halfwidth / *grid.refine_step + 1e-9));
      for (int k = -n; k <= n; ++k) {
        if (k == 0) continue;
        const double va = center + k * *grid.refine_step;
        if (va > frozen.v_low() && va < target) consider(va);
      }
    }
  }

  if (best.coast) {
    // The engine stays off, so only the upper edge needs the cap.
    if (best.vb > safety_speed) {
      best.vb = safety_speed;
      best.clamped = true;
    }
  } else if (best.vb > safety_speed) {
    const double va = std::max(safety_speed - delta, 0.0);
    best = band_between(frozen, va, safety_speed);
    best.clamped = true;
  }
  return best;
}

AsymptoticCost asymptotic_expansion(const FrozenDynamics& frozen, double target) {
  const double vl = frozen.v_low();
  const double vh = frozen.v_high();
  if (target < vl || target >= vh)
    throw Error(ErrorKind::Domain, "asymptotic expansion: target outside [V_low, V_high)");

  const double h_top = frozen.power(vh, Engine::On);
  AsymptoticCost out;
  out.leading = h_top * (target - vl) / (vh - vl);

  auto on = [&](double s) { return frozen.accel(s, Engine::On); };
  auto off = [&](double s) { return frozen.accel(s, Engine::Off); };
  const double i_power = quadrature::integrate_speed(
      frozen, [&](double s) { return (frozen.power(s, Engine::On) - h_top) / on(s); }, vl, vh);
  const double i_on =
      quadrature::integrate_speed(frozen, [&](double s) { return (s - vh) / on(s); }, vl, vh);
  const double i_off =
      quadrature::integrate_speed(frozen, [&](double s) { return (s - vl) / off(s); }, vh, vl);

  // Whether each equilibrium is reached in finite time only affects the
  // diagnostic: the expansion has the same form in both cases.
  const double t_up = quadrature::integrate_speed(
      frozen, [&](double s) { return 1.0 / on(s); }, vl, vh);
  const double t_down = quadrature::integrate_speed(
      frozen, [&](double s) { return 1.0 / off(s); }, vh, vl);
  std::string regime = std::string("top ") +
                       (std::isfinite(t_up) ? "reached in finite time" : "approached asymptotically") +
                       ", bottom " +
                       (std::isfinite(t_down) ? "reached in finite time" : "approached asymptotically");

  if (!std::isfinite(i_power) || !std::isfinite(i_on) || !std::isfinite(i_off)) {
    out.applicable = false;
    out.diagnostic = "divergent integral:";
    if (!std::isfinite(i_power)) out.diagnostic += " (h - h(V_high))/f(.,1)";
    if (!std::isfinite(i_on)) out.diagnostic += " (s - V_high)/f(.,1)";
    if (!std::isfinite(i_off)) out.diagnostic += " (s - V_low)/f(.,0)";
    out.diagnostic += "; " + regime;
    return out;
  }
  out.applicable = true;
  out.bracket = frozen.switch_cost() + i_power - (i_on + i_off) * h_top / (vh - vl);
  out.diagnostic = regime;
  return out;
}

double asymptotic_average_cost(const FrozenDynamics& frozen, double target,
                               double period) {
  if (!(period > 0.0))
    throw Error(ErrorKind::Domain, "asymptotic cost: period must be > 0");
  const auto exp = asymptotic_expansion(frozen, target);
  if (!exp.applicable) throw Error(ErrorKind::NotApplicable, exp.diagnostic);
  return exp.at(period);
}

}  // namespace ecodrive
