#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>

#include "graphon_lab/errors.hpp"
#include "graphon_lab/random.hpp"

namespace graphon_lab {

/// Eigenvalues in descending order; column j of `vectors` pairs with values(j).
struct EigenDecomposition {
  Eigen::VectorXd values;
  std::optional<Eigen::MatrixXd> vectors;
};

/// Dense symmetric eigensolver (Householder tridiagonalization followed by
/// implicit-shift QR on the tridiagonal form).
inline EigenDecomposition symmetric_eigen(const Eigen::MatrixXd& m, bool want_vectors) {
  if (m.rows() != m.cols()) fail(ErrorKind::domain, "symmetric_eigen: matrix must be square");
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12) {
        std::ostringstream os;
        os << "symmetric_eigen: matrix not symmetric at (" << i << "," << j << ")";
        fail(ErrorKind::domain, os.str());
      }
    }
  }
  if (!m.allFinite()) fail(ErrorKind::numeric, "symmetric_eigen: non-finite entries");

  EigenDecomposition out;
  if (m.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::numeric, "symmetric_eigen: QR iteration did not converge");
  }
  // Eigen returns ascending order.
  out.values = solver.eigenvalues().reverse();
  if (want_vectors) out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

/// Largest |eigenvalue| of a symmetric matrix by power iteration from a
/// fixed pseudo-random start vector.
inline double operator_norm_estimate(const Eigen::MatrixXd& m, int iterations = 50,
                                     std::uint64_t seed = 0x5eed) {
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;
  RandomStream stream(seed, 0, "power_iteration");
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = stream.normal();
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    estimate = norm;
    v = w / norm;
  }
  return estimate;
}

}  // namespace graphon_lab
