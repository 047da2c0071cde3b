#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "graphon_lab/eigensolver.hpp"
#include "graphon_lab/errors.hpp"
#include "graphon_lab/graphon.hpp"
#include "graphon_lab/sample.hpp"
#include "graphon_lab/spectrum.hpp"

// Executable versions of the perturbation and U-statistic identities that
// connect lambda_r(K_n) to the population spectrum.

namespace graphon_lab {

/// Hoeffding split of (1/(n(n-1))) sum_{i!=j} h_r(U_i,U_j) with
/// h_r(x,y) = phi_r(x) W(x,y) phi_r(y).
struct HoeffdingParts {
  double total = 0.0;
  double theta = 0.0;
  double linear = 0.0;
  double degenerate = 0.0;
  double V_rn = 0.0;
  double s_rn = 0.0;
};

struct CrossProjections {
  std::vector<std::size_t> modes;
  std::vector<double> values;
  std::size_t modes_used = 0;
};

struct KatoTempleInterval {
  double lower = 0.0;
  double upper = 0.0;
  double eta = 0.0;
  double residual_norm = 0.0;
  // Eigenvalues computed in floating point carry an n eps ||M||_F error, which
  // matters when u is an exact eigenvector and the interval is a point.
  double slack = 0.0;

  bool contains(double x) const { return lower - slack <= x && x <= upper + slack; }
};

struct ExpansionRemainder {
  double first_order = 0.0;
  double remainder = 0.0;
  double bound = 0.0;
};

/// u^T K u with u = phi / sqrt(s_rn), s_rn = |phi|^2.
inline double rayleigh_quotient(const Eigen::MatrixXd& K, const Eigen::VectorXd& phi_values) {
  if (K.rows() != phi_values.size() || K.cols() != phi_values.size()) {
    fail(ErrorKind::domain, "rayleigh_quotient: dimension mismatch");
  }
  const double s = phi_values.squaredNorm();
  if (!(s > 0.0)) fail(ErrorKind::domain, "rayleigh_quotient: zero eigenfunction vector");
  return phi_values.dot(K * phi_values) / s;
}

/// Decomposition from a precomputed zero-diagonal K_n and phi_r(U_i).
inline HoeffdingParts hoeffding_decompose(const Eigen::MatrixXd& K, const Eigen::VectorXd& phi,
                                          double lambda_r) {
  const auto n = static_cast<double>(phi.size());
  if (phi.size() < 2 || K.rows() != phi.size()) fail(ErrorKind::domain, "hoeffding_decompose: bad dimensions");
  HoeffdingParts h;
  h.s_rn = phi.squaredNorm();
  h.V_rn = (phi.array().square() - 1.0).mean();
  h.total = phi.dot(K * phi) / (n * (n - 1.0));
  h.theta = lambda_r;
  h.linear = 2.0 * lambda_r * h.V_rn;
  h.degenerate = h.total - h.theta - h.linear;
  return h;
}

inline HoeffdingParts hoeffding_decompose(const GraphonModel& model, const SpectralData& spec,
                                          std::size_t r, std::span<const double> latents) {
  const Eigen::VectorXd phi = spec.phi(r).evaluate_many(latents);
  return hoeffding_decompose(kernel_matrix(model, latents), phi, spec.lambda(r));
}

/// T_k = n^{-1/2} sum_i phi_r(U_i) phi_k(U_i) for k <= K, k != r. Modes with a
/// zero eigenvalue carry no information and are skipped.
inline CrossProjections cross_projections(const SpectralData& spec, std::size_t r,
                                          std::span<const double> latents, std::size_t K) {
  if (K > spec.size()) fail(ErrorKind::parameter, "cross_projections: K exceeds retained modes");
  CrossProjections out;
  out.modes_used = K;
  const Eigen::VectorXd phi_r = spec.phi(r).evaluate_many(latents);
  const double root_n = std::sqrt(static_cast<double>(latents.size()));
  const double zero_tol = detail::zero_threshold(spec.eigenvalues);
  for (std::size_t k = 1; k <= K; ++k) {
    if (k == r || std::abs(spec.lambda(k)) <= zero_tol) continue;
    const Eigen::VectorXd phi_k = spec.phi(k).evaluate_many(latents);
    out.modes.push_back(k);
    out.values.push_back(phi_r.dot(phi_k) / root_n);
  }
  return out;
}

/// (1/n) sum_{i!=j} h_{r,2}(U_i,U_j), the degenerate kernel summed directly:
/// h_{r,2}(x,y) = h_r(x,y) - h_1(x) - h_1(y) - lambda_r, h_1 = lambda_r (phi_r^2 - 1).
inline double degenerate_ustatistic(const Eigen::MatrixXd& K, const Eigen::VectorXd& phi,
                                    double lambda_r) {
  const auto n = static_cast<double>(phi.size());
  const double h1_sum = lambda_r * (phi.array().square() - 1.0).sum();
  return (phi.dot(K * phi) - 2.0 * (n - 1.0) * h1_sum - n * (n - 1.0) * lambda_r) / n;
}

/// Spectral side of the finite-rank identity:
/// sum_{k!=r} lambda_k (T_k^2 - (1/n) sum_i phi_k(U_i)^2).
inline double finite_rank_degenerate_form(const SpectralData& spec, std::size_t r,
                                          std::span<const double> latents) {
  const Eigen::VectorXd phi_r = spec.phi(r).evaluate_many(latents);
  const auto n = static_cast<double>(latents.size());
  double acc = 0.0;
  for (std::size_t k = 1; k <= spec.size(); ++k) {
    if (k == r) continue;
    const Eigen::VectorXd phi_k = spec.phi(k).evaluate_many(latents);
    const double T = phi_r.dot(phi_k) / std::sqrt(n);
    acc += spec.lambda(k) * (T * T - phi_k.squaredNorm() / n);
  }
  return acc;
}

struct NormalizationCheck {
  double gap = 0.0;
  double bound = 0.0;
  // The bound is attained exactly when V_rn < 0, and gap is a difference of
  // two O(1/n) numbers, so compare up to a few ulps of 1/n.
  double slack = 0.0;
  bool holds() const { return gap <= bound + slack; }
};

/// |1/s_rn - (1/n)(1 - V_rn)| against V_rn^2 / (n (1 - |V_rn|)).
inline NormalizationCheck normalization_expansion(double s_rn, double V_rn, std::size_t n) {
  const auto nn = static_cast<double>(n);
  NormalizationCheck c;
  c.gap = std::abs(1.0 / s_rn - (1.0 - V_rn) / nn);
  c.bound = V_rn * V_rn / (nn * (1.0 - std::abs(V_rn)));
  c.slack = 1e-12 * c.bound + 16.0 * std::numeric_limits<double>::epsilon() / nn;
  return c;
}

/// Two-sided eigenvalue enclosure from a Rayleigh quotient and its residual.
/// Valid only if (alpha, beta) holds exactly one eigenvalue of M; the caller
/// checks that separately.
inline KatoTempleInterval kato_temple_interval(const Eigen::MatrixXd& M, const Eigen::VectorXd& u,
                                               double alpha, double beta) {
  if (std::abs(u.norm() - 1.0) > 1e-10) fail(ErrorKind::precondition, "kato_temple_interval: u must be a unit vector");
  const Eigen::VectorXd Mu = M * u;
  KatoTempleInterval out;
  out.eta = u.dot(Mu);
  if (!(alpha < out.eta && out.eta < beta)) {
    std::ostringstream os;
    os << "kato_temple_interval: Rayleigh quotient " << out.eta << " outside (" << alpha << ", " << beta << ")";
    fail(ErrorKind::precondition, os.str());
  }
  const double res_sq = (Mu - out.eta * u).squaredNorm();
  out.residual_norm = std::sqrt(res_sq);
  out.slack = static_cast<double>(M.rows()) * std::numeric_limits<double>::epsilon() * M.norm();
  // Lower end pairs with the distance to beta, upper end with alpha.
  out.lower = out.eta - res_sq / (beta - out.eta);
  out.upper = out.eta + res_sq / (out.eta - alpha);
  return out;
}

/// Exactly one eigenvalue strictly inside (alpha, beta)?
inline bool single_eigenvalue_in(const Eigen::VectorXd& values, double alpha, double beta) {
  int count = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) count += (values(i) > alpha && values(i) < beta) ? 1 : 0;
  return count == 1;
}

/// Second-order check for the r-th (descending) eigenvalue of M under M + E.
inline ExpansionRemainder expansion_remainder(const Eigen::MatrixXd& M, const Eigen::MatrixXd& E,
                                              std::size_t r) {
  const auto base = symmetric_eigen(M, true);
  const auto idx = static_cast<Eigen::Index>(r) - 1;
  if (idx < 0 || idx >= base.values.size()) fail(ErrorKind::precondition, "expansion_remainder: index out of range");
  const double lambda = base.values(idx);
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < base.values.size(); ++j) {
    if (j != idx) gap = std::min(gap, std::abs(lambda - base.values(j)));
  }
  if (!(gap > 1e-12)) fail(ErrorKind::precondition, "expansion_remainder: eigenvalue is not simple");
  const double norm = 1.01 * operator_norm_estimate(E);
  if (!(norm < 0.5 * gap)) fail(ErrorKind::precondition, "expansion_remainder: |E| must be below gap/2");

  const Eigen::VectorXd u = base.vectors->col(idx);
  const auto perturbed = symmetric_eigen(M + E, false);
  ExpansionRemainder out;
  out.first_order = u.dot(E * u);
  out.remainder = perturbed.values(idx) - lambda - out.first_order;
  out.bound = 2.0 * norm * norm / gap;
  return out;
}

namespace detail {

inline double resolvent_solve(const Eigen::MatrixXd& compressed, const Eigen::VectorXd& coupling,
                              double shift, std::size_t n) {
  const Eigen::Index d = compressed.rows();
  Eigen::MatrixXd A = -compressed;
  A.diagonal().array() += shift;
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  // sigma_min >= 1 / (sqrt(d) |A^{-1}|_1) = rcond |A|_1 / sqrt(d). Eigen's
  // rcond estimate is meaningless once a pivot is exactly zero.
  const double min_pivot = d > 0 ? lu.matrixLU().diagonal().cwiseAbs().minCoeff() : 1.0;
  const double sigma_min_bound = lu.rcond() * norm1 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(d, 1)));
  const double threshold = 1e-8 * static_cast<double>(n);
  if (!(min_pivot > 0.0) || !(sigma_min_bound > threshold)) {
    fail(ErrorKind::numeric, "resolvent_correction: shifted block is near-singular");
  }
  const double out = coupling.dot(lu.solve(coupling));
  if (!std::isfinite(out)) fail(ErrorKind::numeric, "resolvent_correction: non-finite solve");
  return out;
}

}  // namespace detail

/// u^T K V ((n-1) lambda_r I - V^T K V)^{-1} V^T K u, with V an orthonormal
/// basis of u-perp built from the Householder reflector that maps u to e_1.
inline double resolvent_correction(const Eigen::MatrixXd& K, const Eigen::VectorXd& u,
                                   double lambda_r, std::size_t n) {
  const Eigen::Index N = u.size();
  if (K.rows() != N || K.cols() != N || N < 2) fail(ErrorKind::domain, "resolvent_correction: bad dimensions");
  if (std::abs(u.norm() - 1.0) > 1e-10) fail(ErrorKind::precondition, "resolvent_correction: u must be a unit vector");

  Eigen::VectorXd w = u;
  w(0) += u(0) >= 0.0 ? 1.0 : -1.0;
  const double c = w.squaredNorm();
  const Eigen::VectorXd p = K * w;
  const double wp = w.dot(p);
  // H K H with H = I - (2/c) w w^T, as a rank-2 update.
  Eigen::MatrixXd B = K;
  B.noalias() -= (2.0 / c) * (w * p.transpose() + p * w.transpose());
  B.noalias() += (4.0 * wp / (c * c)) * (w * w.transpose());

  const Eigen::MatrixXd C = B.bottomRightCorner(N - 1, N - 1);
  const Eigen::VectorXd b = B.col(0).tail(N - 1);
  return detail::resolvent_solve(C, b, static_cast<double>(n - 1) * lambda_r, n);
}

/// Same quadratic form for an explicit orthonormal basis V (N x (N-1)) of u-perp.
inline double resolvent_correction_in_basis(const Eigen::MatrixXd& K, const Eigen::VectorXd& u,
                                            const Eigen::MatrixXd& V, double lambda_r, std::size_t n) {
  const Eigen::MatrixXd C = V.transpose() * K * V;
  const Eigen::VectorXd b = V.transpose() * (K * u);
  return detail::resolvent_solve(C, b, static_cast<double>(n - 1) * lambda_r, n);
}

}  // namespace graphon_lab
