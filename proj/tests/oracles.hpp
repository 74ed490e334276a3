// Independent reference values for the tests: closed-form antiderivatives on
// the flat windless slice, Boost root finding and quadrature, and a segment
// driver that measures a speed change by forward time stepping.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "ecodrive/dynamics.hpp"

namespace oracle {

// Flat windless closed forms with f(s,1) = A - a s^2 and f(s,0) = -(c + a s^2).
struct Flat {
  double a = 6e-4;
  double c = 0.03;
  double f1 = 0.20;
  double watts = 161.0;
  double alpha = 10.0;

  double A() const { return f1 - c; }
  double v_high() const { return std::sqrt(A() / a); }

  double time_on(double v0, double v1) const {
    const double w = v_high();
    return (std::atanh(v1 / w) - std::atanh(v0 / w)) / (a * w);
  }
  double length_on(double v0, double v1) const {
    return (std::log(A() - a * v0 * v0) - std::log(A() - a * v1 * v1)) / (2.0 * a);
  }
  // Coasting from v1 down to v0 (v1 > v0).
  double time_off(double v1, double v0) const {
    const double q = std::sqrt(a / c);
    return (std::atan(v1 * q) - std::atan(v0 * q)) / std::sqrt(a * c);
  }
  double length_off(double v1, double v0) const {
    return (std::log(c + a * v1 * v1) - std::log(c + a * v0 * v0)) / (2.0 * a);
  }

  struct Period {
    double va, vb, time, length, energy;
    double average() const { return length / time; }
    double cost() const { return energy / time; }
  };

  Period period(double va, double vb) const {
    Period p{va, vb, 0, 0, 0};
    p.time = time_on(va, vb) + time_off(vb, va);
    p.length = length_on(va, vb) + length_off(vb, va);
    p.energy = watts * time_on(va, vb) + alpha;
    return p;
  }

  // Upper speed giving average `target` for lower speed va.
  double upper_for(double va, double target) const {
    auto gap = [&](double vb) { return period(va, vb).average() - target; };
    boost::math::tools::eps_tolerance<double> tol(50);
    std::uintmax_t iters = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(gap, target, v_high() * (1 - 1e-9), tol, iters);
    return 0.5 * (lo + hi);
  }

  // Best band over the lower speeds target - {2, 1.5, 1, 0.5}.
  Period coarse_best(double target) const {
    Period best{};
    bool first = true;
    for (double off : {2.0, 1.5, 1.0, 0.5}) {
      const double va = target - off;
      const Period p = period(va, upper_for(va, target));
      if (first || p.cost() < best.cost()) best = p;
      first = false;
    }
    return best;
  }

  // Cheapest two-switch strategy with period T2 and the given average. The
  // family is one-parameter, so the band is fixed by the period. When the
  // period is longer than the one reaching rest, the vehicle waits at rest.
  double min_cost_at_period(double T2, double target) const {
    boost::math::tools::eps_tolerance<double> tol(50);
    const double vb0 = upper_for(1e-12, target);
    const double longest = period(1e-12, vb0).time;
    if (T2 <= longest) {
      auto gap = [&](double va) { return period(va, upper_for(va, target)).time - T2; };
      std::uintmax_t iters = 200;
      auto [lo, hi] = boost::math::tools::toms748_solve(gap, 1e-12, target - 1e-6, tol, iters);
      const double va = 0.5 * (lo + hi);
      return period(va, upper_for(va, target)).cost();
    }
    auto gap = [&](double vb) { return period(0.0, vb).length - target * T2; };
    std::uintmax_t iters = 200;
    auto [lo, hi] = boost::math::tools::toms748_solve(gap, target, v_high() * (1 - 1e-13), tol, iters);
    const double vb = 0.5 * (lo + hi);
    return (watts * time_on(0.0, vb) + alpha) / T2;
  }
};

inline double kronrod(const std::function<double(double)>& fn, double lo, double hi,
                      double tol = 1e-10) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, lo, hi, 15, tol);
}

inline double tanh_sinh(const std::function<double(double)>& fn, double lo, double hi) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(fn, lo, hi);
}

inline double bisect(const std::function<double(double)>& fn, double lo, double hi) {
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 300;
  auto [a, b] = boost::math::tools::bisect(fn, lo, hi, tol, iters);
  return 0.5 * (a + b);
}

// Time, length and energy of a speed change v0 -> v1 under constant u,
// measured by stepping the integrator and landing the last step on v1.
struct Measured {
  double time = 0.0;
  double length = 0.0;
  double energy = 0.0;
};

inline Measured step_until(ecodrive::RaceState s, double v1, double dt,
                           const ecodrive::TrackProfile& track,
                           const ecodrive::WindField& wind,
                           const ecodrive::VehicleParams& params,
                           const ecodrive::PowerModel& power) {
  const bool rising = v1 > s.x2;
  auto reached = [&](const ecodrive::RaceState& st) { return rising ? st.x2 >= v1 : st.x2 <= v1; };
  for (;;) {
    const auto next = ecodrive::integrate(s, s.u, dt, track, wind, params, power);
    if (reached(next)) {
      // Secant on the step length for the exact landing.
      double h0 = 0.0, g0 = s.x2 - v1;
      double h1 = dt, g1 = next.x2 - v1;
      for (int i = 0; i < 30 && g1 != 0.0 && g1 != g0; ++i) {
        const double h2 = h1 - g1 * (h1 - h0) / (g1 - g0);
        h0 = h1;
        g0 = g1;
        h1 = std::clamp(h2, 1e-15, dt);
        g1 = ecodrive::integrate(s, s.u, h1, track, wind, params, power).x2 - v1;
        if (std::abs(h1 - h0) < 1e-16) break;
      }
      const auto last = ecodrive::integrate(s, s.u, h1, track, wind, params, power);
      return {last.t, last.x1, last.energy};
    }
    s = next;
  }
}

}  // namespace oracle
