#pragma once

// Normality and paired significance tests used on phone-aggregated scores.

#include <cstddef>
#include <span>
#include <string>

namespace vt::stats {

struct NormalityTest {
  double statistic = 0.0;  // K^2
  double p_value = 0.0;
  double z_skew = 0.0;
  double z_kurtosis = 0.0;
  std::size_t n = 0;
};

// D'Agostino-Pearson omnibus test; n >= 20.
NormalityTest dagostino_normality(std::span<const double> x);

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;  // two-sided
  bool significant = false;
  std::size_t n = 0;     // after dropping zero differences
  bool exact = false;
};

inline constexpr std::size_t kWilcoxonExactMaxN = 25;

// Zero differences are dropped; ties get average ranks. Exact null
// distribution for n <= 25, otherwise the normal approximation with tie and
// continuity corrections. Throws NumericError when every difference is zero
// or fewer than 5 remain.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

double normal_cdf(double z);

}  // namespace vt::stats
