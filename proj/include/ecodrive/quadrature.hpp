// Speed-reparametrized integrals. While the engine mode is constant and the
// acceleration f(s, u) does not vanish, time, distance and energy between
// two speeds are integrals over speed:
//
//   t = int ds / f,   d = int s ds / f,   e = int h(s, u) ds / f.
#pragma once

#include <functional>

#include "ecodrive/dynamics.hpp"

namespace ecodrive::quadrature {

struct Options {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_intervals = 4000;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration of fn over
/// [lo, hi] (either orientation). Endpoints are never evaluated. Throws
/// Error(Numeric) on non-finite integrand values.
double integrate(const std::function<double(double)>& fn, double lo, double hi,
                 const Options& opts = {});

/// Integral with possibly singular endpoints. A singular endpoint is cut
/// back by `cutoff`; the remaining tail is classified from two further
/// truncation levels. Returns +/-infinity when the tail diverges.
double integrate_improper(const std::function<double(double)>& fn, double lo,
                          double hi, bool singular_lo, bool singular_hi,
                          double cutoff, const Options& opts = {});

/// Truncation used at equilibrium endpoints of a frozen slice.
double singular_cutoff(const FrozenDynamics& frozen);

/// Integral of fn over [lo, hi], treating any endpoint that coincides with
/// an equilibrium of `frozen` as singular.
double integrate_speed(const FrozenDynamics& frozen,
                       const std::function<double(double)>& fn, double lo,
                       double hi, const Options& opts = {});

/// Monotone speed change under a constant engine mode.
struct SpeedSegment {
  const FrozenDynamics& frozen;
  Engine u;
  double v0;
  double v1;
};

/// All three return +infinity when the segment ends at an equilibrium that
/// is only approached asymptotically. Throw Error(InvalidSegment) when the
/// direction does not match the mode or f vanishes inside the segment.
double elapsed_time(const SpeedSegment& seg);
double covered_length(const SpeedSegment& seg);
double energy_used(const SpeedSegment& seg);

/// One oscillation: accelerate va -> vb, hold vb for `dwell` seconds with the
/// engine on, coast vb -> va. One switching cost per period.
struct PeriodStats {
  double t_up = 0.0, t_down = 0.0;
  double d_up = 0.0, d_down = 0.0;
  double e_up = 0.0;
  double dwell = 0.0;
  double period = 0.0;    // T1 [s]
  double distance = 0.0;  // D [m]
  double energy = 0.0;    // E [J]

  double average_speed() const { return distance / period; }
  double average_cost() const { return energy / period; }
};

PeriodStats period_stats(const FrozenDynamics& frozen, double va, double vb,
                         double dwell = 0.0);

}  // namespace ecodrive::quadrature
