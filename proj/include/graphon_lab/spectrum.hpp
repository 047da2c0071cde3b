#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "graphon_lab/eigensolver.hpp"
#include "graphon_lab/errors.hpp"
#include "graphon_lab/graphon.hpp"

namespace graphon_lab {

/// Eigenfunction phi_k of T_W, normalized so that E[phi_k(U)^2] = 1.
class Eigenfunction {
 public:
  /// Constant value on each block [edges[b-1], edges[b]).
  struct PiecewiseConstant {
    std::vector<double> edges;
    std::vector<double> weights;
    std::vector<double> values;
  };
  /// scale * x^alpha.
  struct Power {
    double alpha;
    double scale;
  };
  /// Values at midpoint nodes; off-node evaluation by Nystrom extension.
  struct Nystrom {
    std::shared_ptr<const GraphonModel> model;
    std::shared_ptr<const std::vector<double>> nodes;
    Eigen::VectorXd node_values;
    double eigenvalue;
  };
  using Representation = std::variant<PiecewiseConstant, Power, Nystrom>;

  explicit Eigenfunction(Representation rep) : rep_(std::move(rep)) {}

  const Representation& representation() const { return rep_; }

  double operator()(double x) const {
    return std::visit(
        [x](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PiecewiseConstant>) {
            for (std::size_t b = 0; b + 1 < f.edges.size(); ++b) {
              if (x < f.edges[b]) return f.values[b];
            }
            return f.values.back();
          } else if constexpr (std::is_same_v<T, Power>) {
            return f.scale * std::pow(x, f.alpha);
          } else {
            if (std::abs(f.eigenvalue) < 1e-12) {
              fail(ErrorKind::domain,
                   "Nystrom extension undefined for a zero eigenvalue");
            }
            const auto& nodes = *f.nodes;
            const auto m = static_cast<Eigen::Index>(nodes.size());
            double acc = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) {
              acc += f.model->evaluate_unchecked(x, nodes[static_cast<std::size_t>(j)]) *
                     f.node_values(j);
            }
            return acc / (f.eigenvalue * static_cast<double>(m));
          }
        },
        rep_);
  }

  Eigen::VectorXd evaluate_many(std::span<const double> xs) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) out(static_cast<Eigen::Index>(i)) = (*this)(xs[i]);
    return out;
  }

  /// E[phi(U)^p] under the measure the eigenfunction lives on (exact cell
  /// sums, closed form, or the discrete node measure).
  double moment(int p) const {
    return std::visit(
        [p](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PiecewiseConstant>) {
            double acc = 0.0;
            for (std::size_t b = 0; b < f.values.size(); ++b) acc += f.weights[b] * std::pow(f.values[b], p);
            return acc;
          } else if constexpr (std::is_same_v<T, Power>) {
            return std::pow(f.scale, p) / (p * f.alpha + 1.0);
          } else {
            return f.node_values.array().pow(p).mean();
          }
        },
        rep_);
  }

  /// Var(phi(U)^2), computed without the E[phi^4] - 1 cancellation where the
  /// measure is discrete.
  double variance_of_square() const {
    return std::visit(
        [this](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, PiecewiseConstant>) {
            const double m2 = moment(2);
            double acc = 0.0;
            for (std::size_t b = 0; b < f.values.size(); ++b) {
              const double d = f.values[b] * f.values[b] - m2;
              acc += f.weights[b] * d * d;
            }
            return acc;
          } else if constexpr (std::is_same_v<T, Power>) {
            const double m2 = moment(2);
            return std::max(0.0, moment(4) - m2 * m2);
          } else {
            const Eigen::ArrayXd sq = f.node_values.array().square();
            return (sq - sq.mean()).square().mean();
          }
        },
        rep_);
  }

 private:
  Representation rep_;
};

enum class Provenance { analytic, nystrom };

inline const char* to_string(Provenance p) {
  return p == Provenance::analytic ? "analytic" : "nystrom";
}

/// Population eigenpairs of T_W ordered by decreasing |lambda|.
struct SpectralData {
  std::vector<double> eigenvalues;
  std::vector<Eigenfunction> eigenfunctions;
  Provenance provenance = Provenance::analytic;
  int grid_size = 0;
  /// True when everything beyond the retained modes is exactly zero.
  bool rank_exact = true;
  /// Discrete eigenvalues that were not retained (Nystrom only).
  std::vector<double> unretained;
  /// Node set for Nystrom spectra; empty otherwise.
  std::shared_ptr<const std::vector<double>> nodes;

  std::size_t size() const { return eigenvalues.size(); }
  /// 1-based access, matching the usual lambda_k indexing.
  double lambda(std::size_t k) const { return eigenvalues.at(k - 1); }
  const Eigenfunction& phi(std::size_t k) const { return eigenfunctions.at(k - 1); }
};

enum class Regime { non_degenerate, degenerate };

inline const char* to_string(Regime r) {
  return r == Regime::degenerate ? "degenerate" : "non_degenerate";
}

struct RegimeConstants {
  std::size_t r = 1;
  double lambda_r = 0.0;
  double gap = 0.0;
  double sigma_sq = 0.0;
  double C_r = 0.0;
  /// (sum of squared eigenvalues beyond the truncation) / gap.
  double tail_bound = 0.0;
  Regime regime = Regime::non_degenerate;
};

inline constexpr double kDegeneracyTolerance = 1e-8;
inline constexpr double kMinimumGap = 1e-10;

namespace detail {

// Relative threshold under which an eigenvalue counts as zero.
inline double zero_threshold(std::span<const double> values) {
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  return 1e-12 * std::max(scale, 1.0);
}

// Indices sorted by decreasing |value|; larger signed value first on exact ties.
inline std::vector<std::size_t> order_by_magnitude(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(values[a]);
    const double mb = std::abs(values[b]);
    if (ma != mb) return ma > mb;
    return values[a] > values[b];
  });
  return idx;
}

inline void reject_sign_ties(std::span<const double> ordered, double zero_tol) {
  for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
    const double a = ordered[i];
    const double b = ordered[i + 1];
    if (std::abs(a) > zero_tol && std::abs(b) > zero_tol && (a > 0) != (b > 0) &&
        std::abs(std::abs(a) - std::abs(b)) < 1e-12) {
      std::ostringstream os;
      os << "eigenvalues " << a << " and " << b << " tie in magnitude; ordering is ambiguous";
      fail(ErrorKind::numeric, os.str());
    }
  }
}

}  // namespace detail

/// Closed-form spectrum for finite-rank presets (BlockModel, PowerKernel).
inline SpectralData analytic_spectrum(const GraphonModel& model) {
  SpectralData out;
  out.provenance = Provenance::analytic;
  out.rank_exact = true;

  if (model.holds<PowerKernel>()) {
    const double a = model.as<PowerKernel>().alpha;
    out.eigenvalues = {1.0 / (2.0 * a + 1.0)};
    out.eigenfunctions.emplace_back(Eigenfunction::Power{a, std::sqrt(2.0 * a + 1.0)});
    return out;
  }
  if (!model.holds<BlockModel>()) {
    fail(ErrorKind::unsupported_model,
         "analytic spectrum is available for block_model and power_kernel only; use nystrom");
  }

  // T_W acts on block-constant functions through M_ab = P_ab pi_b. With
  // D = diag(pi), S = D^{1/2} P D^{1/2} is symmetric and similar to M, and
  // phi = D^{-1/2} w has E[phi^2] = |w|^2 = 1.
  const auto& b = model.as<BlockModel>();
  const auto nb = static_cast<Eigen::Index>(b.proportions.size());
  Eigen::VectorXd sqrt_pi(nb);
  for (Eigen::Index i = 0; i < nb; ++i) sqrt_pi(i) = std::sqrt(b.proportions[static_cast<std::size_t>(i)]);
  const Eigen::MatrixXd P = 0.5 * (b.connectivity + b.connectivity.transpose());
  const Eigen::MatrixXd S = sqrt_pi.asDiagonal() * P * sqrt_pi.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  if (solver.info() != Eigen::Success) fail(ErrorKind::numeric, "block eigenproblem failed");

  std::vector<double> raw(solver.eigenvalues().data(), solver.eigenvalues().data() + nb);
  const double zero_tol = detail::zero_threshold(raw);
  const auto order = detail::order_by_magnitude(raw);
  for (std::size_t idx : order) {
    if (std::abs(raw[idx]) <= zero_tol) continue;
    Eigenfunction::PiecewiseConstant f;
    f.edges = model.block_edges();
    f.weights = b.proportions;
    f.values.resize(static_cast<std::size_t>(nb));
    for (Eigen::Index i = 0; i < nb; ++i) {
      f.values[static_cast<std::size_t>(i)] = solver.eigenvectors()(i, static_cast<Eigen::Index>(idx)) / sqrt_pi(i);
    }
    for (double v : f.values) {
      if (std::abs(v) > 1e-8) {
        if (v < 0) for (double& w : f.values) w = -w;
        break;
      }
    }
    out.eigenvalues.push_back(raw[idx]);
    out.eigenfunctions.emplace_back(std::move(f));
  }
  detail::reject_sign_ties(out.eigenvalues, zero_tol);
  return out;
}

/// Midpoint Nystrom discretization with m nodes, keeping the K modes of
/// largest |lambda|.
inline SpectralData nystrom_spectrum(const GraphonModel& model, int m, int K) {
  if (m < 64) fail(ErrorKind::parameter, "nystrom grid size must be at least 64");
  if (K < 1 || K > m) fail(ErrorKind::parameter, "nystrom mode count must lie in [1, m]");

  auto nodes = std::make_shared<std::vector<double>>(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) (*nodes)[static_cast<std::size_t>(i)] = (i + 0.5) / m;

  Eigen::MatrixXd A(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      const double w = model.evaluate((*nodes)[static_cast<std::size_t>(i)],
                                      (*nodes)[static_cast<std::size_t>(j)]) / m;
      A(i, j) = w;
      A(j, i) = w;
    }
  }
  const auto decomp = symmetric_eigen(A, true);
  std::vector<double> raw(decomp.values.data(), decomp.values.data() + m);
  const auto order = detail::order_by_magnitude(raw);

  SpectralData out;
  out.provenance = Provenance::nystrom;
  out.grid_size = m;
  out.rank_exact = false;
  out.nodes = nodes;
  auto shared_model = std::make_shared<const GraphonModel>(model);
  const double root_m = std::sqrt(static_cast<double>(m));
  for (int k = 0; k < m; ++k) {
    const std::size_t idx = order[static_cast<std::size_t>(k)];
    if (k >= K) {
      out.unretained.push_back(raw[idx]);
      continue;
    }
    Eigen::VectorXd values = root_m * decomp.vectors->col(static_cast<Eigen::Index>(idx));
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (std::abs(values(i)) > 1e-8) {
        if (values(i) < 0) values = -values;
        break;
      }
    }
    out.eigenvalues.push_back(raw[idx]);
    out.eigenfunctions.emplace_back(Eigenfunction::Nystrom{shared_model, nodes, std::move(values), raw[idx]});
  }
  detail::reject_sign_ties(out.eigenvalues, detail::zero_threshold(raw) + 1e-10);
  return out;
}

/// sigma_r^2, gap, C_r and regime for target index r (1-based). `truncation`
/// limits the modes entering C_r; the rest is folded into `tail_bound`.
inline RegimeConstants regime_constants(const SpectralData& spec, std::size_t r,
                                        std::optional<std::size_t> truncation = std::nullopt) {
  if (r < 1 || r > spec.size()) {
    std::ostringstream os;
    os << "target index r=" << r << " outside the " << spec.size() << " retained modes";
    fail(ErrorKind::assumption_violation, os.str());
  }
  const std::size_t K = std::min(truncation.value_or(spec.size()), spec.size());
  if (K < r) fail(ErrorKind::parameter, "truncation must keep the target mode");

  RegimeConstants c;
  c.r = r;
  c.lambda_r = spec.lambda(r);
  if (std::abs(c.lambda_r) < kMinimumGap) {
    fail(ErrorKind::assumption_violation, "target eigenvalue is zero");
  }

  // Finite-rank operators on L^2[0,1] always have 0 in their spectrum.
  double gap = std::abs(c.lambda_r);
  for (std::size_t k = 1; k <= spec.size(); ++k) {
    if (k != r) gap = std::min(gap, std::abs(c.lambda_r - spec.lambda(k)));
  }
  for (double v : spec.unretained) gap = std::min(gap, std::abs(c.lambda_r - v));
  if (gap < kMinimumGap) {
    fail(ErrorKind::assumption_violation, "target eigenvalue is not simple (gap below 1e-10)");
  }
  c.gap = gap;

  double C = 0.0;
  double tail_sq = 0.0;
  for (std::size_t k = 1; k <= spec.size(); ++k) {
    if (k == r) continue;
    const double lk = spec.lambda(k);
    if (k <= K) C += lk * lk / (c.lambda_r - lk);
    else tail_sq += lk * lk;
  }
  for (double v : spec.unretained) tail_sq += v * v;
  c.C_r = C;
  c.tail_bound = tail_sq / gap;

  c.sigma_sq = spec.phi(r).variance_of_square();
  c.regime = c.sigma_sq < kDegeneracyTolerance ? Regime::degenerate : Regime::non_degenerate;
  return c;
}

}  // namespace graphon_lab
