#pragma once

#include <cmath>
#include <limits>

#include "graphon_lab/eigensolver.hpp"
#include "graphon_lab/spectrum.hpp"

namespace graphon_lab {

struct MatchedEigenvalue {
  Eigen::Index index_in_sorted = -1;
  double value = 0.0;
  double normalized_value = 0.0;
  double distance_to_target = std::numeric_limits<double>::infinity();
  /// Inside the gamma_r/2 window around lambda_r with every other eigenvalue outside.
  bool unambiguous = false;
};

/// Picks the eigenvalue whose value/(n-1) is nearest lambda_r (by value, not rank).
inline MatchedEigenvalue match_target(const EigenDecomposition& decomp,
                                      const RegimeConstants& constants, Eigen::Index n) {
  MatchedEigenvalue best;
  const double scale = 1.0 / static_cast<double>(n - 1);
  const double half_gap = 0.5 * constants.gap;
  int inside = 0;
  for (Eigen::Index i = 0; i < decomp.values.size(); ++i) {
    const double normalized = decomp.values(i) * scale;
    const double distance = std::abs(normalized - constants.lambda_r);
    if (distance < half_gap) ++inside;
    if (distance < best.distance_to_target) {
      best.index_in_sorted = i;
      best.value = decomp.values(i);
      best.normalized_value = normalized;
      best.distance_to_target = distance;
    }
  }
  best.unambiguous = inside == 1 && best.distance_to_target < half_gap;
  return best;
}

}  // namespace graphon_lab
