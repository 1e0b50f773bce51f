#include "vt/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vt/error.hpp"

namespace vt::stats {
namespace {

double sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

NormalityTest dagostino_normality(std::span<const double> x) {
  const std::size_t count = x.size();
  if (count < 20) throw NumericError("D'Agostino test needs n >= 20, got " + std::to_string(count));
  const double n = static_cast<double>(count);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0)) throw NumericError("D'Agostino test on a constant sample");

  // Skewness.
  const double b1 = m3 / std::pow(m2, 1.5);
  double y = b1 * std::sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)));
  const double beta2 = 3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) / ((n - 2) * (n + 5) * (n + 7) * (n + 9));
  const double w2 = -1 + std::sqrt(2 * (beta2 - 1));
  const double delta = 1 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2.0 / (w2 - 1));
  if (y == 0) y = 1;
  const double zs = delta * std::log(y / alpha + std::sqrt((y / alpha) * (y / alpha) + 1));

  // Kurtosis.
  const double b2 = m4 / (m2 * m2);
  const double e = 3.0 * (n - 1) / (n + 1);
  const double varb2 = 24.0 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5));
  const double xk = (b2 - e) / std::sqrt(varb2);
  const double sqrtbeta1 = 6.0 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) *
                           std::sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)));
  const double a = 6.0 + 8.0 / sqrtbeta1 * (2.0 / sqrtbeta1 + std::sqrt(1 + 4.0 / (sqrtbeta1 * sqrtbeta1)));
  const double term1 = 1 - 2 / (9.0 * a);
  const double denom = 1 + xk * std::sqrt(2 / (a - 4.0));
  if (denom == 0) throw NumericError("D'Agostino kurtosis transform is undefined for this sample");
  const double term2 = sign(denom) * std::cbrt((1 - 2.0 / a) / std::abs(denom));
  const double zk = (term1 - term2) / std::sqrt(2 / (9.0 * a));

  NormalityTest r;
  r.z_skew = zs;
  r.z_kurtosis = zk;
  r.statistic = zs * zs + zk * zk;
  r.p_value = std::exp(-r.statistic / 2);  // chi-square with 2 dof
  r.n = count;
  return r;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha) {
  if (a.size() != b.size()) {
    throw StructuralError("Wilcoxon test needs paired samples, got " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()));
  }
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  if (d.empty()) throw NumericError("Wilcoxon test is degenerate: all paired differences are zero");
  const std::size_t n = d.size();
  if (n < 5) throw NumericError("Wilcoxon test needs at least 5 nonzero differences, got " + std::to_string(n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return std::abs(d[i]) < std::abs(d[j]); });
  // Ranks are kept doubled so average ranks of ties stay integral.
  std::vector<long> rank2(n);
  double tie_term = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    const long r2 = static_cast<long>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  long wp2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (d[i] > 0) wp2 += rank2[i];
  }
  WilcoxonResult r;
  r.n = n;
  r.w_plus = wp2 / 2.0;
  r.w_minus = (total2 - wp2) / 2.0;
  r.statistic = std::min(r.w_plus, r.w_minus);
  const long wmin2 = std::min(wp2, total2 - wp2);

  if (n <= kWilcoxonExactMaxN) {
    r.exact = true;
    // counts[s] = number of sign assignments whose doubled W+ equals s.
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1;
    long reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (long s = reach; s >= 0; --s) {
        if (counts[s] != 0) counts[s + rank2[i]] += counts[s];
      }
      reach += rank2[i];
    }
    double tail = 0;
    for (long s = 0; s <= wmin2; ++s) tail += counts[s];
    r.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1) / 4;
    const double var = nn * (nn + 1) * (2 * nn + 1) / 24 - tie_term / 48;
    if (!(var > 0)) throw NumericError("Wilcoxon test: zero variance under the null");
    double diff = r.statistic - mean;
    if (diff != 0) diff -= 0.5 * sign(diff);
    r.p_value = std::min(1.0, 2.0 * normal_cdf(-std::abs(diff) / std::sqrt(var)));
  }
  r.significant = r.p_value < alpha;
  return r;
}

}  // namespace vt::stats
