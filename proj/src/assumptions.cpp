#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ecodrive/dynamics.hpp"
#include "ecodrive/error.hpp"
#include "ecodrive/quadrature.hpp"

namespace ecodrive {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

const char* to_string(Curvature c) {
  switch (c) {
    case Curvature::StrictlyConvex: return "strictly convex";
    case Curvature::StrictlyConcave: return "strictly concave";
    case Curvature::Neither: return "neither";
  }
  return "?";
}

std::vector<const AssumptionItem*> AssumptionReport::items() const {
  return {&continuity,     &forward_uniqueness, &engine_equilibrium,
          &engine_effective, &coast_limit,      &power_positive,
          &power_nondecreasing, &switch_cost_bounded, &strict_curvature};
}

bool AssumptionReport::pass() const {
  const auto all = items();
  return std::all_of(all.begin(), all.end(),
                     [](const AssumptionItem* i) { return i->verdict == Verdict::Pass; });
}

Curvature classify_curvature(std::span<const double> values) {
  if (values.size() < 3) return Curvature::Neither;
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double threshold = 1e-12 * scale;
  bool all_pos = true, all_neg = true;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    const double d2 = values[i - 1] - 2.0 * values[i] + values[i + 1];
    if (!(d2 > threshold)) all_pos = false;
    if (!(d2 < -threshold)) all_neg = false;
  }
  if (all_pos) return Curvature::StrictlyConvex;
  if (all_neg) return Curvature::StrictlyConcave;
  return Curvature::Neither;
}

namespace {

constexpr int kScanPoints = 1001;

AssumptionItem item(std::string name, bool ok, double witness, std::string detail) {
  return {std::move(name), ok ? Verdict::Pass : Verdict::Fail, witness, std::move(detail)};
}

std::vector<double> grid(double lo, double hi, int n, bool open) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = open ? lo + (hi - lo) * (i + 1) / (n + 1.0) : lo + (hi - lo) * i / (n - 1.0);
  return g;
}

}  // namespace

AssumptionReport check_assumptions(const FrozenDynamics& fr) {
  AssumptionReport r;
  const double vl = fr.v_low();
  const double vh = fr.v_high();
  const double span = vh - vl;
  const auto closed = grid(vl, vh, kScanPoints, false);
  const auto open = grid(vl, vh, kScanPoints, true);
  auto f1 = [&](double x) { return fr.accel(x, Engine::On); };
  auto f0 = [&](double x) { return fr.accel(x, Engine::Off); };
  auto h1 = [&](double x) { return fr.power(x, Engine::On); };

  // Continuity on (V_low, V_high]: the largest jump between neighbours must
  // shrink when the grid is refined.
  {
    auto max_jump = [&](int n) {
      const auto g = grid(vl, vh, n, true);
      double m = 0.0;
      for (int i = 1; i < n; ++i)
        for (Engine u : {Engine::On, Engine::Off})
          m = std::max(m, std::abs(fr.accel(g[i], u) - fr.accel(g[i - 1], u)));
      return m;
    };
    const double coarse = max_jump(kScanPoints);
    const double fine = max_jump(4 * kScanPoints);
    r.continuity = item("continuity", fine <= 0.5 * coarse || coarse < 1e-12, coarse,
                        "max neighbour jump " + std::to_string(coarse) + " -> " +
                            std::to_string(fine) + " after 4x refinement");
  }

  // Forward uniqueness: a finite one-sided Lipschitz bound.
  {
    double slope = -1e300;
    for (int i = 1; i < kScanPoints; ++i)
      for (Engine u : {Engine::On, Engine::Off}) {
        const double d = (fr.accel(open[i], u) - fr.accel(open[i - 1], u)) / (open[i] - open[i - 1]);
        slope = std::max(slope, d);
      }
    r.forward_uniqueness = item("forward uniqueness", std::isfinite(slope) && slope < 1e6,
                                slope, "largest upward difference quotient");
  }

  // f(., 1) > 0 below V_high, = 0 at V_high, < 0 above.
  {
    double min_below = 1e300;
    for (double x : open) min_below = std::min(min_below, f1(x));
    double max_above = -1e300;
    for (int i = 1; i <= 50; ++i) max_above = std::max(max_above, f1(vh + 0.02 * span * i / 50.0));
    const double at = f1(vh);
    const double scale = std::abs(fr.accel_from_rest(Engine::On)) + 1e-300;
    const bool ok = min_below > 0.0 && std::abs(at) <= 1e-8 * scale && max_above < 0.0 &&
                    fr.accel_from_rest(Engine::On) > 0.0;
    r.engine_equilibrium = item("engine-on equilibrium", ok, min_below,
                                "min f(.,1) below V_high; f(V_high,1) = " + std::to_string(at));
  }

  // f(., 0) < f(., 1).
  {
    double gap = 1e300;
    for (double x : closed) gap = std::min(gap, f1(x) - f0(x));
    gap = std::min(gap, fr.accel_from_rest(Engine::On) - fr.accel_from_rest(Engine::Off));
    r.engine_effective = item("engine effective", gap > 0.0, gap, "min f(.,1) - f(.,0)");
  }

  // coasting tends to V_low.
  {
    double max_above = -1e300;
    for (double x : open) max_above = std::max(max_above, f0(x));
    max_above = std::max(max_above, f0(vh));
    bool ok = max_above < 0.0;
    std::string detail = "max f(.,0) above V_low";
    if (fr.v_low_is_root()) {
      double min_below = 1e300;
      for (const double x : grid(0.0, vl, 101, true)) min_below = std::min(min_below, f0(x));
      ok = ok && min_below > 0.0;
      detail += "; root at V_low, min f(.,0) below = " + std::to_string(min_below);
    } else {
      ok = ok && fr.accel_from_rest(Engine::Off) <= 0.0;
      detail += "; rest is a sticking point, f(0+,0) = " +
                std::to_string(fr.accel_from_rest(Engine::Off));
    }
    r.coast_limit = item("coasting limit speed", ok, max_above, detail);
  }

  // h(., 0) = 0 < h(., 1).
  {
    double min_on = 1e300, max_off = 0.0;
    for (double x : closed) {
      min_on = std::min(min_on, h1(x));
      max_off = std::max(max_off, std::abs(fr.power(x, Engine::Off)));
    }
    r.power_positive = item("power positive only when on", min_on > 0.0 && max_off == 0.0,
                            min_on, "min h(.,1)");
  }

  // h(., 1) nondecreasing.
  {
    double worst = 0.0;
    for (int i = 1; i < kScanPoints; ++i) worst = std::min(worst, h1(closed[i]) - h1(closed[i - 1]));
    r.power_nondecreasing = item("power nondecreasing", worst >= 0.0, worst,
                                 "most negative increment of h(.,1)");
  }

  // switching cost bounded by the full-speed penalty.
  try {
    const double h_top = h1(vh);
    const double i_power = quadrature::integrate_speed(
        fr, [&](double s) { return (h_top - h1(s)) / f1(s); }, vl, vh);
    const double i_off =
        quadrature::integrate_speed(fr, [&](double s) { return (s - vl) / f0(s); }, vh, vl);
    const double i_on =
        quadrature::integrate_speed(fr, [&](double s) { return (s - vh) / f1(s); }, vl, vh);
    r.switch_cost_lhs = i_power + fr.switch_cost();
    r.switch_cost_rhs = h_top / span * (i_off + i_on);
    if (!std::isfinite(r.switch_cost_lhs) || !std::isfinite(r.switch_cost_rhs)) {
      r.switch_cost_bounded = {"switching cost bounded", Verdict::Indeterminate, 0.0,
                               "an integral diverges"};
    } else {
      r.switch_cost_bounded =
          item("switching cost bounded", r.switch_cost_lhs < r.switch_cost_rhs,
               r.switch_cost_rhs - r.switch_cost_lhs,
               "lhs " + std::to_string(r.switch_cost_lhs) + " < rhs " +
                   std::to_string(r.switch_cost_rhs));
    }
  } catch (const Error& e) {
    r.switch_cost_bounded = {"switching cost bounded", Verdict::Indeterminate, 0.0,
                             std::string("quadrature failed: ") + e.what()};
  }

  // F = h(.,1) f(.,0) / (f(.,1) - f(.,0)) strictly convex or concave.
  {
    const auto g = grid(vl, vh, kCurvatureGridPoints, true);
    std::vector<double> values(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      values[i] = h1(g[i]) * f0(g[i]) / (f1(g[i]) - f0(g[i]));
    r.curvature = classify_curvature(values);
    r.curvature_grid_points = kCurvatureGridPoints;
    r.strict_curvature = item("strict curvature of F", r.curvature != Curvature::Neither,
                              0.0, std::string(to_string(r.curvature)) + " on " +
                                       std::to_string(kCurvatureGridPoints) + " points");
  }
  return r;
}

}  // namespace ecodrive
