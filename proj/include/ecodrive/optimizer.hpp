// Two-switch oscillation bands minimizing average power at a prescribed
// average speed on a frozen slice.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecodrive/dynamics.hpp"

namespace ecodrive {

struct OscillationBand {
  double va = 0.0;        // lower speed [m/s]
  double vb = 0.0;        // upper speed [m/s]
  double dwell = 0.0;     // time held at vb per period [s]
  double period = 0.0;    // T1 [s]
  double distance = 0.0;  // D [m]
  double energy = 0.0;    // E [J], one switching cost included
  double avg_cost = 0.0;  // C^a = E / T1 [W]
  bool clamped = false;   // upper speed cut to the safety speed
  bool coast = false;     // engine never needed
};

/// Lower-speed candidates, expressed as offsets below the target speed so
/// the same grid follows a moving target.
struct GridSpec {
  std::vector<double> offsets{2.0, 1.5, 1.0, 0.5};
  double dichotomy_tol = 1e-6;           // on the period average speed [m/s]
  std::optional<double> refine_step;     // fine stage step [m/s]
  double refine_halfwidth = 0.5;         // fine stage extent around the best

  /// p candidates V - (p + 1 - i) / 2, i = 1..p.
  static GridSpec coarse(int p = 4);
  static GridSpec fine(double step = 0.01);

  /// Candidates in (v_low, target), ascending. Falls back to evenly spaced
  /// speeds in the gap when every offset lands at or below v_low.
  std::vector<double> candidates(double target, double v_low) const;
};

struct UpperLimit {
  double vb;
  double dwell;
};

UpperLimit upper_limit(const FrozenDynamics& frozen, double va, double target,
                       double tol = 1e-6);

OscillationBand band_cost(const FrozenDynamics& frozen, double va,
                          double target, double tol = 1e-6);

/// Band (va, vb) evaluated as is, without enforcing an average speed. Used
/// for clamped and maximal bands.
OscillationBand band_between(const FrozenDynamics& frozen, double va,
                             double vb);

inline constexpr double kDefaultSafetyMargin = 0.5;  // delta [m/s]

OscillationBand optimal_band(const FrozenDynamics& frozen, double target,
                             double safety_speed, const GridSpec& grid,
                             double delta = kDefaultSafetyMargin);

/// Large-period expansion of the minimal two-switch cost:
///   leading + bracket / T2.
struct AsymptoticCost {
  bool applicable = false;
  double leading = 0.0;  // [W]
  double bracket = 0.0;  // [J]
  std::string diagnostic;

  double at(double period) const { return leading + bracket / period; }
};

AsymptoticCost asymptotic_expansion(const FrozenDynamics& frozen,
                                    double target);

/// leading + bracket / T2; throws Error(NotApplicable) with the diagnostic
/// when a required integral diverges.
double asymptotic_average_cost(const FrozenDynamics& frozen, double target,
                               double period);

}  // namespace ecodrive
