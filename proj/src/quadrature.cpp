#include "ecodrive/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "ecodrive/error.hpp"

namespace ecodrive::quadrature {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 15-point Kronrod abscissae (positive half) and weights; the 7-point Gauss
// rule uses the odd-indexed abscissae.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double lo, hi, value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

double checked(double v, double s) {
  if (!std::isfinite(v))
    throw Error(ErrorKind::Numeric,
                "quadrature: non-finite integrand at s = " + std::to_string(s));
  return v;
}

Piece kronrod(const std::function<double(double)>& fn, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = checked(fn(center), center);
  double kronrod_sum = fc * kKronrodWeights[7];
  double gauss_sum = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double f1 = checked(fn(center - dx), center - dx);
    const double f2 = checked(fn(center + dx), center + dx);
    kronrod_sum += kKronrodWeights[i] * (f1 + f2);
    if (i % 2 == 1) gauss_sum += kGaussWeights[i / 2] * (f1 + f2);
  }
  const double k = kronrod_sum * half;
  const double g = gauss_sum * half;
  return {lo, hi, k, std::abs(k - g)};
}

double integrate_ordered(const std::function<double(double)>& fn, double lo,
                         double hi, const Options& opts) {
  std::priority_queue<Piece> heap;
  heap.push(kronrod(fn, lo, hi));
  double total = heap.top().value;
  double error = heap.top().error;
  int count = 1;
  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) &&
         count < opts.max_intervals) {
    const Piece worst = heap.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;  // cannot split further
    heap.pop();
    const Piece left = kronrod(fn, worst.lo, mid);
    const Piece right = kronrod(fn, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed the running-update rounding.
  double sum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

// Tail of an integral toward a singular endpoint at `edge`, starting at
// distance `cutoff` from it on side `dir` (+1: edge is the upper limit).
// Returns the extrapolated tail, or +/-inf if it diverges.
double singular_tail(const std::function<double(double)>& fn, double edge,
                     double dir, double cutoff, const Options& opts) {
  constexpr double kRatio = 100.0;
  const double p0 = edge - dir * cutoff;
  const double p1 = edge - dir * cutoff / kRatio;
  const double p2 = edge - dir * cutoff / (kRatio * kRatio);
  const double t1 = integrate_ordered(fn, std::min(p0, p1), std::max(p0, p1), opts);
  const double t2 = integrate_ordered(fn, std::min(p1, p2), std::max(p1, p2), opts);
  if (t1 == 0.0) return 0.0;
  const double q = t2 / t1;
  // Integrand ~ d^-p gives q = kRatio^(p - 1); p >= 1 diverges. The 0.8
  // threshold puts the cut at p ~ 0.95.
  if (q > 0.8) return t1 > 0.0 ? kInf : -kInf;
  if (q <= 0.0) return t1 + t2;  // oscillating or sign change: no extrapolation
  return t1 / (1.0 - q);
}

}  // namespace

double integrate(const std::function<double(double)>& fn, double lo, double hi,
                 const Options& opts) {
  if (lo == hi) return 0.0;
  if (lo > hi) return -integrate_ordered(fn, hi, lo, opts);
  return integrate_ordered(fn, lo, hi, opts);
}

double integrate_improper(const std::function<double(double)>& fn, double lo,
                          double hi, bool singular_lo, bool singular_hi,
                          double cutoff, const Options& opts) {
  if (lo == hi) return 0.0;
  if (lo > hi) return -integrate_improper(fn, hi, lo, singular_hi, singular_lo, cutoff, opts);
  const int n_singular = (singular_lo ? 1 : 0) + (singular_hi ? 1 : 0);
  if (n_singular == 0) return integrate_ordered(fn, lo, hi, opts);
  cutoff = std::min(cutoff, (hi - lo) / (2.0 * n_singular + 1.0));

  const double a = singular_lo ? lo + cutoff : lo;
  const double b = singular_hi ? hi - cutoff : hi;
  double total = integrate_ordered(fn, a, b, opts);
  if (singular_lo) total += singular_tail(fn, lo, -1.0, cutoff, opts);
  if (singular_hi) total += singular_tail(fn, hi, +1.0, cutoff, opts);
  return total;  // inf + -inf (both ends divergent, opposite signs) gives NaN
}

double singular_cutoff(const FrozenDynamics& frozen) {
  return 1e-6 * (frozen.v_high() - frozen.v_low());
}

namespace {

bool near(double a, double b) { return std::abs(a - b) < kRootTolerance; }

// Whether f(., u) vanishes at speed v (an equilibrium of that mode).
bool vanishes_at(const FrozenDynamics& frozen, Engine u, double v) {
  if (u == Engine::On) return near(v, frozen.v_high());
  return frozen.v_low_is_root() && near(v, frozen.v_low());
}

}  // namespace

double integrate_speed(const FrozenDynamics& frozen,
                       const std::function<double(double)>& fn, double lo,
                       double hi, const Options& opts) {
  auto singular = [&](double v) {
    return near(v, frozen.v_high()) || (frozen.v_low_is_root() && near(v, frozen.v_low()));
  };
  return integrate_improper(fn, lo, hi, singular(lo), singular(hi),
                            singular_cutoff(frozen), opts);
}

namespace {

void validate_segment(const SpeedSegment& seg) {
  const auto& fr = seg.frozen;
  const double lo = std::min(seg.v0, seg.v1);
  const double hi = std::max(seg.v0, seg.v1);
  if (lo < fr.v_low() - kRootTolerance || hi > fr.v_high() + kRootTolerance)
    throw Error(ErrorKind::InvalidSegment,
                "segment [" + std::to_string(lo) + ", " + std::to_string(hi) +
                    "] leaves [V_low, V_high]");
  if (seg.u == Engine::On && seg.v1 < seg.v0)
    throw Error(ErrorKind::InvalidSegment, "engine-on segment must accelerate");
  if (seg.u == Engine::Off && seg.v1 > seg.v0)
    throw Error(ErrorKind::InvalidSegment, "engine-off segment must decelerate");
  // f must keep the sign of the mode strictly inside the segment.
  const double expected = seg.u == Engine::On ? 1.0 : -1.0;
  constexpr int kSamples = 64;
  for (int i = 1; i < kSamples; ++i) {
    const double s = lo + (hi - lo) * i / kSamples;
    if (!(expected * fr.accel(s, seg.u) > 0.0))
      throw Error(ErrorKind::InvalidSegment,
                  "acceleration vanishes inside the segment at s = " + std::to_string(s));
  }
}

template <class Weight>
double segment_integral(const SpeedSegment& seg, Weight&& weight) {
  if (seg.v0 == seg.v1) return 0.0;
  validate_segment(seg);
  const auto& fr = seg.frozen;
  const Engine u = seg.u;
  auto integrand = [&](double s) { return weight(s) / fr.accel(s, u); };
  return integrate_improper(integrand, seg.v0, seg.v1, vanishes_at(fr, u, seg.v0),
                            vanishes_at(fr, u, seg.v1), singular_cutoff(fr));
}

}  // namespace

double elapsed_time(const SpeedSegment& seg) {
  return segment_integral(seg, [](double) { return 1.0; });
}

double covered_length(const SpeedSegment& seg) {
  return segment_integral(seg, [](double s) { return s; });
}

double energy_used(const SpeedSegment& seg) {
  if (seg.u == Engine::Off) {
    if (seg.v0 != seg.v1) validate_segment(seg);
    return 0.0;
  }
  const auto& fr = seg.frozen;
  return segment_integral(seg, [&](double s) { return fr.power(s, Engine::On); });
}

PeriodStats period_stats(const FrozenDynamics& frozen, double va, double vb,
                         double dwell) {
  if (!(va < vb))
    throw Error(ErrorKind::InvalidSegment, "period: lower speed must be below upper");
  if (dwell < 0.0) throw Error(ErrorKind::InvalidSegment, "period: negative dwell");
  if (dwell > 0.0 && !near(vb, frozen.v_high()))
    throw Error(ErrorKind::InvalidSegment,
                "period: dwell is only possible at the engine-on equilibrium");
  const SpeedSegment up{frozen, Engine::On, va, vb};
  const SpeedSegment down{frozen, Engine::Off, vb, va};
  PeriodStats st;
  st.t_up = elapsed_time(up);
  st.d_up = covered_length(up);
  st.e_up = energy_used(up);
  st.t_down = elapsed_time(down);
  st.d_down = covered_length(down);
  st.dwell = dwell;
  st.period = st.t_up + dwell + st.t_down;
  st.distance = st.d_up + vb * dwell + st.d_down;
  st.energy = st.e_up + frozen.power(vb, Engine::On) * dwell + frozen.switch_cost();
  return st;
}

}  // namespace ecodrive::quadrature
