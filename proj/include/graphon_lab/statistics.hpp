#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "graphon_lab/errors.hpp"

namespace graphon_lab {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

inline constexpr std::size_t kKsMinimumSamples = 10;

/// Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2), the Kolmogorov
/// survival function.
inline double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Asymptotic p-value with the (sqrt(m) + 0.12 + 0.11/sqrt(m)) correction.
inline double ks_p_value(double statistic, double effective_size) {
  const double root = std::sqrt(effective_size);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic);
}

/// One-sample Kolmogorov-Smirnov test of `samples` against `cdf`.
inline KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < kKsMinimumSamples) fail(ErrorKind::parameter, "KS test needs at least 10 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    // Step over ties so the empirical CDF jumps once per distinct value.
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    // Left limit of the reference CDF, so point masses are compared fairly.
    const double f = cdf(sorted[i]);
    const double f_left = cdf(std::nextafter(sorted[i], -std::numeric_limits<double>::infinity()));
    const double below = static_cast<double>(i) / m;
    const double at = static_cast<double>(j) / m;
    d = std::max({d, std::abs(at - f), std::abs(f_left - below)});
    i = j;
  }
  return {d, ks_p_value(d, m)};
}

/// Two-sample Kolmogorov-Smirnov test over the pooled sample points.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < kKsMinimumSamples || b.size() < kKsMinimumSamples) {
    fail(ErrorKind::parameter, "KS test needs at least 10 samples per group");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto na = static_cast<double>(x.size());
  const auto nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p_value(d, na * nb / (na + nb))};
}

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  /// Excess kurtosis.
  double kurtosis = 0.0;
};

inline SummaryStats summarize(std::span<const double> x) {
  SummaryStats s;
  s.count = x.size();
  if (x.empty()) return s;
  const auto n = static_cast<double>(x.size());
  for (double v : x) s.mean += v;
  s.mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.variance = x.size() > 1 ? m2 * n / (n - 1.0) : 0.0;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

inline double sample_variance(std::span<const double> x) { return summarize(x).variance; }

/// Linear-interpolated quantile of unsorted data, p in [0,1].
inline double quantile(std::vector<double> x, double p) {
  if (x.empty()) return 0.0;
  std::sort(x.begin(), x.end());
  const double pos = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return x[lo] * (1.0 - frac) + x[hi] * frac;
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

}  // namespace graphon_lab
