#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "graphon_lab/errors.hpp"

namespace graphon_lab {

/// Piecewise-constant graphon: blocks of the given proportions laid out left
/// to right on [0,1], with connectivity P between blocks.
struct BlockModel {
  std::vector<double> proportions;
  Eigen::MatrixXd connectivity;
};

/// W(x,y) = (xy)^alpha with alpha in (0,1).
struct PowerKernel {
  double alpha = 0.5;
};

/// W(x,y) = min{x,y} + sqrt(xy). Bounded by 2, so kernel-matrix use only.
struct BrownianSqrt {};

/// m x m table, constant on the uniform cells [i/m,(i+1)/m) (last cell closed).
struct GridKernel {
  Eigen::MatrixXd values;
};

class GraphonModel {
 public:
  using Variant = std::variant<BlockModel, PowerKernel, BrownianSqrt, GridKernel>;

  GraphonModel(Variant v) : variant_(std::move(v)) { prepare(); }

  const Variant& variant() const { return variant_; }

  template <class T>
  bool holds() const { return std::holds_alternative<T>(variant_); }

  template <class T>
  const T& as() const { return std::get<T>(variant_); }

  /// Preset name: block_model, power_kernel, brownian_sqrt or grid_kernel.
  std::string kind() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, BlockModel>) return "block_model";
          else if constexpr (std::is_same_v<T, PowerKernel>) return "power_kernel";
          else if constexpr (std::is_same_v<T, BrownianSqrt>) return "brownian_sqrt";
          else return "grid_kernel";
        },
        variant_);
  }

  /// W(x,y) for x,y in [0,1]; throws a domain error outside.
  double evaluate(double x, double y) const {
    if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
      std::ostringstream os;
      os << "graphon coordinates must lie in [0,1], got (" << x << ", " << y << ")";
      fail(ErrorKind::domain, os.str());
    }
    return evaluate_unchecked(x, y);
  }

  double evaluate_unchecked(double x, double y) const {
    return std::visit(
        [&](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, BlockModel>) {
            return m.connectivity(block_of(x), block_of(y));
          } else if constexpr (std::is_same_v<T, PowerKernel>) {
            return std::pow(x * y, m.alpha);
          } else if constexpr (std::is_same_v<T, BrownianSqrt>) {
            return std::min(x, y) + std::sqrt(x * y);
          } else {
            return m.values(grid_cell(x, m.values.rows()), grid_cell(y, m.values.rows()));
          }
        },
        variant_);
  }

  /// Index of the block containing x (BlockModel only).
  Eigen::Index block_of(double x) const {
    const auto nb = static_cast<Eigen::Index>(cumulative_.size());
    for (Eigen::Index b = 0; b + 1 < nb; ++b) {
      if (x < cumulative_[static_cast<std::size_t>(b)]) return b;
    }
    return nb - 1;
  }

  /// Right edges of the blocks (BlockModel only); the last entry is 1.
  const std::vector<double>& block_edges() const { return cumulative_; }

  static Eigen::Index grid_cell(double x, Eigen::Index m) {
    const auto i = static_cast<Eigen::Index>(std::floor(x * static_cast<double>(m)));
    return std::clamp<Eigen::Index>(i, 0, m - 1);
  }

  /// Upper bound on sup|W|; tight for every preset.
  double sup_norm_bound() const {
    return std::visit(
        [](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, BlockModel>) {
            return m.connectivity.size() == 0 ? 0.0 : m.connectivity.cwiseAbs().maxCoeff();
          } else if constexpr (std::is_same_v<T, PowerKernel>) {
            return 1.0;
          } else if constexpr (std::is_same_v<T, BrownianSqrt>) {
            return 2.0;
          } else {
            return m.values.size() == 0 ? 0.0 : m.values.cwiseAbs().maxCoeff();
          }
        },
        variant_);
  }

  /// Bernoulli edges need W <= 1 everywhere.
  bool edge_sampling_available() const { return sup_norm_bound() <= 1.0; }

 private:
  void prepare() {
    if (const auto* b = std::get_if<BlockModel>(&variant_)) {
      if (b->proportions.empty()) fail(ErrorKind::parameter, "block model needs at least one block");
      const auto nb = static_cast<Eigen::Index>(b->proportions.size());
      if (b->connectivity.rows() != nb || b->connectivity.cols() != nb) {
        fail(ErrorKind::parameter, "connectivity must be a square matrix matching the number of blocks");
      }
      double acc = 0.0;
      for (double p : b->proportions) {
        acc += p;
        cumulative_.push_back(acc);
      }
    } else if (const auto* g = std::get_if<GridKernel>(&variant_)) {
      if (g->values.rows() == 0 || g->values.rows() != g->values.cols()) {
        fail(ErrorKind::parameter, "grid kernel needs a non-empty square table");
      }
    }
  }

  Variant variant_;
  std::vector<double> cumulative_;
};

// Presets.

inline GraphonModel block_model(std::vector<double> proportions, Eigen::MatrixXd connectivity) {
  return GraphonModel(BlockModel{std::move(proportions), std::move(connectivity)});
}

/// Two blocks with within-probability p and cross-probability q.
inline GraphonModel two_block_model(double first_proportion, double p, double q) {
  Eigen::MatrixXd P(2, 2);
  P << p, q, q, p;
  return block_model({first_proportion, 1.0 - first_proportion}, P);
}

inline GraphonModel constant_graphon(double c) {
  return block_model({1.0}, Eigen::MatrixXd::Constant(1, 1, c));
}

inline GraphonModel power_kernel(double alpha) { return GraphonModel(PowerKernel{alpha}); }

inline GraphonModel brownian_sqrt() { return GraphonModel(BrownianSqrt{}); }

inline GraphonModel grid_kernel(Eigen::MatrixXd values) {
  return GraphonModel(GridKernel{std::move(values)});
}

/// Outcome of `validate`: empty `violations` means the model passed.
struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

inline void check_symmetric_table(const Eigen::MatrixXd& t, const char* what,
                                  ValidationReport& report) {
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < t.cols(); ++j) {
      if (std::abs(t(i, j) - t(j, i)) > 1e-12) {
        std::ostringstream os;
        os << what << " asymmetry at cell (" << i << "," << j << ")";
        report.violations.push_back(os.str());
        return;
      }
    }
  }
}

inline void check_range_table(const Eigen::MatrixXd& t, double hi, const char* what,
                              ValidationReport& report) {
  if (t.size() == 0) return;
  if (t.minCoeff() < 0.0 || t.maxCoeff() > hi) {
    std::ostringstream os;
    os << what << " entries must lie in [0," << hi << "]";
    report.violations.push_back(os.str());
  }
}

}  // namespace detail

/// Structural checks plus a deterministic 10^3-pair symmetry/range probe.
inline ValidationReport validate(const GraphonModel& model) {
  ValidationReport report;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BlockModel>) {
          double sum = 0.0;
          bool negative = false;
          for (double p : m.proportions) {
            sum += p;
            negative = negative || p <= 0.0;
          }
          if (negative) report.violations.push_back("proportions must be positive");
          if (std::abs(sum - 1.0) > 1e-12) {
            std::ostringstream os;
            os << "proportions sum to " << sum;
            report.violations.push_back(os.str());
          }
          detail::check_symmetric_table(m.connectivity, "connectivity", report);
          detail::check_range_table(m.connectivity, 1.0, "connectivity", report);
        } else if constexpr (std::is_same_v<T, PowerKernel>) {
          if (!(m.alpha > 0.0 && m.alpha < 1.0)) {
            report.violations.push_back("alpha must lie in (0,1)");
          }
        } else if constexpr (std::is_same_v<T, GridKernel>) {
          detail::check_symmetric_table(m.values, "grid", report);
          detail::check_range_table(m.values, 1.0, "grid", report);
        }
      },
      model.variant());
  if (!report.ok()) return report;

  // Probe on a fixed 32x32 lattice of interior points (~10^3 pairs).
  constexpr int kProbe = 32;
  const double bound = model.sup_norm_bound();
  for (int i = 0; i < kProbe; ++i) {
    for (int j = 0; j < kProbe; ++j) {
      const double x = (i + 0.37) / kProbe;
      const double y = (j + 0.71) / kProbe;
      const double wxy = model.evaluate(x, y);
      const double wyx = model.evaluate(y, x);
      if (wxy != wyx) {
        std::ostringstream os;
        os << "asymmetry at point pair (" << x << "," << y << ")";
        report.violations.push_back(os.str());
        return report;
      }
      if (!(wxy >= 0.0 && wxy <= bound + 1e-12)) {
        std::ostringstream os;
        os << "value " << wxy << " outside [0," << bound << "] at (" << x << "," << y << ")";
        report.violations.push_back(os.str());
        return report;
      }
    }
  }
  return report;
}

}  // namespace graphon_lab
