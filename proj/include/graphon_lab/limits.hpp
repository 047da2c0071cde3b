#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "graphon_lab/errors.hpp"
#include "graphon_lab/random.hpp"
#include "graphon_lab/spectrum.hpp"

namespace graphon_lab {

struct GaussianLaw {
  double variance = 0.0;
};

/// sum_k c_k (Z_k^2 - 1) with i.i.d. standard normal Z_k.
struct WeightedChiSquareLaw {
  std::vector<std::size_t> modes;
  std::vector<double> coefficients;
  double centering = 0.0;
  std::size_t truncation = 0;
  /// Bound on sum of c_k^2 over modes left out of `coefficients`.
  double tail_sq_mass = 0.0;
};

/// Monte Carlo CDF table size and the seed it is built from.
inline constexpr std::size_t kCdfTableSize = 1'000'000;
inline constexpr std::uint64_t kCdfTableSeed = 0xC0FFEE;

class LimitLaw {
 public:
  using Variant = std::variant<GaussianLaw, WeightedChiSquareLaw>;

  LimitLaw(Variant v) : law_(std::move(v)), cache_(std::make_shared<Cache>()) {}

  const Variant& variant() const { return law_; }
  bool is_gaussian() const { return std::holds_alternative<GaussianLaw>(law_); }
  const GaussianLaw& gaussian() const { return std::get<GaussianLaw>(law_); }
  const WeightedChiSquareLaw& chi_square() const { return std::get<WeightedChiSquareLaw>(law_); }

  double mean() const { return 0.0; }

  double variance() const {
    if (is_gaussian()) return gaussian().variance;
    double acc = 0.0;
    for (double c : chi_square().coefficients) acc += 2.0 * c * c;
    return acc;
  }

  /// Sorted samples backing the weighted chi-square CDF; built on first use.
  const std::vector<double>& cdf_table() const {
    std::call_once(cache_->once, [this] {
      RandomStream stream(kCdfTableSeed, 0, "cdf_table");
      cache_->sorted = draw(kCdfTableSize, stream);
      std::sort(cache_->sorted.begin(), cache_->sorted.end());
    });
    return cache_->sorted;
  }

  std::vector<double> draw(std::size_t count, RandomStream& stream) const {
    std::vector<double> out(count, 0.0);
    if (is_gaussian()) {
      const double sd = std::sqrt(gaussian().variance);
      for (double& x : out) x = sd * stream.normal();
      if (sd == 0.0) std::fill(out.begin(), out.end(), 0.0);
      return out;
    }
    const auto& c = chi_square().coefficients;
    for (double& x : out) {
      double acc = 0.0;
      for (double ck : c) {
        const double z = stream.normal();
        acc += ck * (z * z - 1.0);
      }
      x = acc;
    }
    return out;
  }

 private:
  struct Cache {
    std::once_flag once;
    std::vector<double> sorted;
  };

  Variant law_;
  std::shared_ptr<Cache> cache_;
};

/// N(0, lambda_r^2 sigma_r^2); non-degenerate regime only.
inline LimitLaw gaussian_law(const RegimeConstants& constants) {
  if (constants.regime != Regime::non_degenerate) {
    fail(ErrorKind::wrong_regime, "gaussian limit requires sigma_r^2 > 0 (non-degenerate regime)");
  }
  return LimitLaw(GaussianLaw{constants.lambda_r * constants.lambda_r * constants.sigma_sq});
}

/// Weighted chi-square series with c_k = lambda_r lambda_k / (lambda_r - lambda_k)
/// over the first K retained modes; degenerate regime only.
inline LimitLaw chi_square_law(const SpectralData& spec, const RegimeConstants& constants,
                               std::optional<std::size_t> truncation = std::nullopt) {
  if (constants.regime != Regime::degenerate) {
    fail(ErrorKind::wrong_regime, "weighted chi-square limit requires sigma_r^2 = 0 (degenerate regime)");
  }
  const std::size_t K = truncation.value_or(spec.size());
  if (K > spec.size()) fail(ErrorKind::parameter, "truncation exceeds retained modes");
  const double lr = constants.lambda_r;
  const double zero_tol = detail::zero_threshold(spec.eigenvalues);

  WeightedChiSquareLaw law;
  law.truncation = K;
  law.centering = constants.C_r;
  double dropped_sq = 0.0;
  for (std::size_t k = 1; k <= spec.size(); ++k) {
    if (k == constants.r) continue;
    const double lk = spec.lambda(k);
    if (std::abs(lk) <= zero_tol) continue;
    const double ck = lr * lk / (lr - lk);
    if (k <= K) {
      law.modes.push_back(k);
      law.coefficients.push_back(ck);
    } else {
      dropped_sq += ck * ck;
    }
  }
  double unretained_sq = 0.0;
  for (double v : spec.unretained) unretained_sq += v * v;
  law.tail_sq_mass = dropped_sq + lr * lr / (constants.gap * constants.gap) * unretained_sq;
  return LimitLaw(std::move(law));
}

inline std::vector<double> sample_law(const LimitLaw& law, std::size_t count, RandomStream& stream) {
  if (count < 1) fail(ErrorKind::parameter, "sample_law: count must be positive");
  return law.draw(count, stream);
}

inline double normal_cdf(double x, double variance) {
  if (variance <= 0.0) return x >= 0.0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

/// P(X <= x). Exact for Gaussian laws; empirical over the cached table for
/// weighted chi-square laws (see `law_cdf_accuracy`).
inline double law_cdf(const LimitLaw& law, double x) {
  if (law.is_gaussian()) return normal_cdf(x, law.gaussian().variance);
  if (law.chi_square().coefficients.empty()) return x >= 0.0 ? 1.0 : 0.0;
  const auto& t = law.cdf_table();
  const auto pos = std::upper_bound(t.begin(), t.end(), x) - t.begin();
  return static_cast<double>(pos) / static_cast<double>(t.size());
}

/// Absolute CDF error: 1e-10 for Gaussian laws, the 99% DKW band otherwise.
inline double law_cdf_accuracy(const LimitLaw& law) {
  if (law.is_gaussian() || law.chi_square().coefficients.empty()) return 1e-10;
  return std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(kCdfTableSize)));
}

inline double law_quantile(const LimitLaw& law, double p) {
  if (law.is_gaussian()) {
    const double v = law.gaussian().variance;
    if (v <= 0.0) return 0.0;
    const double sd = std::sqrt(v);
    double lo = -40.0 * sd, hi = 40.0 * sd;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (normal_cdf(mid, v) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  if (law.chi_square().coefficients.empty()) return 0.0;
  const auto& t = law.cdf_table();
  const auto idx = static_cast<std::size_t>(std::clamp(std::ceil(p * static_cast<double>(t.size())) - 1.0, 0.0,
                                                       static_cast<double>(t.size() - 1)));
  return t[idx];
}

inline constexpr std::array<double, 9> kQuantileLevels = {0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99};

}  // namespace graphon_lab
