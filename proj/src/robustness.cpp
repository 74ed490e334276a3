#include "ecodrive/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "ecodrive/error.hpp"
#include "ecodrive/quadrature.hpp"

namespace ecodrive {

SpeedProfileFunction::SpeedProfileFunction(std::function<double(double)> fn,
                                           double lo, double hi)
    : fn_(std::move(fn)), lo_(lo), hi_(hi) {
  if (!(lo < hi))
    throw Error(ErrorKind::InvalidProfile, "profile domain must satisfy lo < hi");
}

SpeedProfileFunction SpeedProfileFunction::tabulated(std::vector<double> speeds,
                                                     std::vector<double> values) {
  const double lo = speeds.empty() ? 0.0 : speeds.front();
  const double hi = speeds.empty() ? 0.0 : speeds.back();
  return {monotone_cubic(std::move(speeds), std::move(values)), lo, hi};
}

SpeedProfileFunction SpeedProfileFunction::scaled(double factor) const {
  return {[fn = fn_, factor](double s) { return factor * fn(s); }, lo_, hi_};
}

SpeedProfileFunction SpeedProfileFunction::plus(const SpeedProfileFunction& other) const {
  if (other.lo_ != lo_ || other.hi_ != hi_)
    throw Error(ErrorKind::InvalidProfile, "profile domains differ");
  return {[a = fn_, b = other.fn_](double s) { return a(s) + b(s); }, lo_, hi_};
}

void SpeedProfileFunction::check_nonvanishing(int samples) const {
  double first = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = lo_ + (hi_ - lo_) * i / (samples - 1.0);
    const double v = fn_(s);
    if (!std::isfinite(v) || v == 0.0 || (i > 0 && (v > 0.0) != (first > 0.0)))
      throw Error(ErrorKind::InvalidProfile,
                  "profile vanishes or changes sign near s = " + std::to_string(s));
    if (i == 0) first = v;
  }
}

std::function<double(double)> monotone_cubic(std::vector<double> x, std::vector<double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw Error(ErrorKind::InvalidProfile, "tabulated profile needs >= 2 matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1]))
      throw Error(ErrorKind::InvalidProfile, "tabulated speeds must be strictly increasing");

  std::vector<double> delta(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = delta[0];
  m[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i)
    m[i] = delta[i - 1] * delta[i] <= 0.0 ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
  // Fritsch-Carlson limiter.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      m[i] = m[i + 1] = 0.0;
      continue;
    }
    const double a = m[i] / delta[i];
    const double b = m[i + 1] / delta[i];
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double t = 3.0 / std::sqrt(r);
      m[i] = t * a * delta[i];
      m[i + 1] = t * b * delta[i];
    }
  }

  struct Table {
    std::vector<double> x, y, m;
  };
  auto table = std::make_shared<const Table>(Table{std::move(x), std::move(y), std::move(m)});
  return [table](double s) {
    const auto& t = *table;
    auto it = std::upper_bound(t.x.begin(), t.x.end(), s);
    std::size_t i = it == t.x.begin() ? 0 : static_cast<std::size_t>(it - t.x.begin()) - 1;
    i = std::min(i, t.x.size() - 2);
    const double h = t.x[i + 1] - t.x[i];
    const double u = std::clamp((s - t.x[i]) / h, 0.0, 1.0);
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * t.y[i] + (u3 - 2 * u2 + u) * h * t.m[i] +
           (-2 * u3 + 3 * u2) * t.y[i + 1] + (u3 - u2) * h * t.m[i + 1];
  };
}

double profile_time(const SpeedProfileFunction& g) {
  return quadrature::integrate([&](double s) { return 1.0 / g(s); }, g.lo(), g.hi());
}

double profile_length(const SpeedProfileFunction& g) {
  return quadrature::integrate([&](double s) { return s / g(s); }, g.lo(), g.hi());
}

double mean_speed(const SpeedProfileFunction& g) {
  g.check_nonvanishing();
  return profile_length(g) / profile_time(g);
}

RatioStats ratio_stats(const SpeedProfileFunction& g, const SpeedProfileFunction& dg) {
  if (g.lo() != dg.lo() || g.hi() != dg.hi())
    throw Error(ErrorKind::InvalidProfile, "profile domains differ");
  constexpr int kSamples = 2001;
  RatioStats st;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double s = g.lo() + (g.hi() - g.lo()) * i / (kSamples - 1.0);
    const double r = dg(s) / g(s);
    st.sup = std::max(st.sup, std::abs(r));
    sum += r;
    sum2 += r * r;
  }
  st.mean = sum / kSamples;
  st.variance = std::max(sum2 / kSamples - st.mean * st.mean, 0.0);
  return st;
}

double perturbation_series(const SpeedProfileFunction& g, const SpeedProfileFunction& dg,
                           int n_terms) {
  if (n_terms < 0) throw Error(ErrorKind::Domain, "series: negative term count");
  g.check_nonvanishing();
  if (ratio_stats(g, dg).sup >= 1.0)
    throw Error(ErrorKind::DivergenceRisk, "series: sup |dg/g| >= 1");

  const double mean = mean_speed(g);
  const double t_perturbed = profile_time(g.plus(dg));
  double sum = 0.0;
  for (int n = 1; n <= n_terms; ++n) {
    const double term = quadrature::integrate(
        [&](double s) {
          const double gs = g(s);
          return (s - mean) / gs * std::pow(-dg(s) / gs, n);
        },
        g.lo(), g.hi());
    sum += term;
  }
  return sum / t_perturbed;
}

double proportional_invariance_check(const SpeedProfileFunction& g, double eps) {
  if (eps == 0.0) return 0.0;
  return std::abs(mean_speed(g.scaled(1.0 + eps)) - mean_speed(g));
}

}  // namespace ecodrive
