// Sensitivity of the average speed of a speed change to errors in the
// identified acceleration profile.
#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ecodrive {

/// A function g on [lo, hi]: either a closed form or a table interpolated
/// with monotone cubic Hermite splines.
class SpeedProfileFunction {
 public:
  SpeedProfileFunction(std::function<double(double)> fn, double lo, double hi);
  static SpeedProfileFunction tabulated(std::vector<double> speeds,
                                        std::vector<double> values);

  double operator()(double s) const { return fn_(s); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  SpeedProfileFunction scaled(double factor) const;
  /// Pointwise sum; the domains must match.
  SpeedProfileFunction plus(const SpeedProfileFunction& other) const;

  /// Throws Error(InvalidProfile) when g has a zero or a sign change on a
  /// dense grid.
  void check_nonvanishing(int samples = 2001) const;

 private:
  std::function<double(double)> fn_;
  double lo_;
  double hi_;
};

/// Monotone (Fritsch-Carlson) cubic interpolant through the samples.
std::function<double(double)> monotone_cubic(std::vector<double> x,
                                             std::vector<double> y);

double profile_time(const SpeedProfileFunction& g);    // T(g) = int 1/g
double profile_length(const SpeedProfileFunction& g);  // L(g) = int s/g

/// F(g) = L(g) / T(g).
double mean_speed(const SpeedProfileFunction& g);

inline constexpr int kDefaultSeriesTerms = 8;

/// Partial sum of the expansion of F(g + dg) - F(g) in powers of dg/g.
/// Throws Error(DivergenceRisk) when sup|dg/g| >= 1.
double perturbation_series(const SpeedProfileFunction& g,
                           const SpeedProfileFunction& dg,
                           int n_terms = kDefaultSeriesTerms);

/// sup |dg/g| and the variance of dg/g (uniform weight on [lo, hi]).
struct RatioStats {
  double sup = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

RatioStats ratio_stats(const SpeedProfileFunction& g,
                       const SpeedProfileFunction& dg);

/// |F((1 + eps) g) - F(g)|.
double proportional_invariance_check(const SpeedProfileFunction& g,
                                     double eps);

}  // namespace ecodrive
