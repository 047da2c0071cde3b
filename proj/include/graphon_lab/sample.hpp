#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "graphon_lab/errors.hpp"
#include "graphon_lab/graphon.hpp"
#include "graphon_lab/random.hpp"

namespace graphon_lab {

inline constexpr int kMaxVertices = 8192;

/// One realization: latents, the zero-diagonal kernel matrix and (optionally)
/// a Bernoulli adjacency matrix drawn from it.
struct SampleDraw {
  std::uint64_t seed = 0;
  std::uint64_t replication_index = 0;
  std::vector<double> latents;
  Eigen::MatrixXd kernel;
  std::optional<Eigen::MatrixXd> adjacency;

  Eigen::Index n() const { return static_cast<Eigen::Index>(latents.size()); }
};

/// n i.i.d. Uniform[0,1) latent positions.
inline std::vector<double> draw_latents(int n, RandomStream& stream) {
  if (n < 2) fail(ErrorKind::parameter, "need at least two vertices");
  std::vector<double> u(static_cast<std::size_t>(n));
  for (double& x : u) x = stream.uniform();
  return u;
}

inline std::vector<double> draw_latents(int n, std::uint64_t seed, std::uint64_t replication) {
  RandomStream stream(seed, replication, streams::latents);
  return draw_latents(n, stream);
}

/// (K_n)_ij = W(U_i, U_j) for i != j, zero on the diagonal.
inline Eigen::MatrixXd kernel_matrix(const GraphonModel& model, std::span<const double> latents) {
  const auto n = static_cast<Eigen::Index>(latents.size());
  for (double u : latents) {
    if (!(u >= 0.0 && u <= 1.0)) fail(ErrorKind::domain, "latent positions must lie in [0,1]");
  }
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    K(j, j) = 0.0;
    const double uj = latents[static_cast<std::size_t>(j)];
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double w = model.evaluate_unchecked(latents[static_cast<std::size_t>(i)], uj);
      K(i, j) = w;
      K(j, i) = w;
    }
  }
  return K;
}

/// Independent Bernoulli(K_ij) edges for i < j, symmetrized, no self-loops.
inline Eigen::MatrixXd adjacency_matrix(const GraphonModel& model, const Eigen::MatrixXd& kernel,
                                        RandomStream& stream) {
  if (!model.edge_sampling_available()) {
    fail(ErrorKind::invalid_probability, "edge sampling requires sup norm <= 1");
  }
  const Eigen::Index n = kernel.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  // Column-major walk over the strict lower triangle; the order is part of
  // the reproducibility contract.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double edge = stream.uniform() < kernel(i, j) ? 1.0 : 0.0;
      A(i, j) = edge;
      A(j, i) = edge;
    }
  }
  return A;
}

inline Eigen::MatrixXd adjacency_matrix(const GraphonModel& model, std::span<const double> latents,
                                        RandomStream& stream) {
  return adjacency_matrix(model, kernel_matrix(model, latents), stream);
}

/// Full draw for replication `rep` using the "latents" and "edges" streams.
inline SampleDraw draw_sample(const GraphonModel& model, int n, std::uint64_t seed,
                              std::uint64_t rep, bool with_adjacency) {
  if (n > kMaxVertices) fail(ErrorKind::parameter, "n exceeds the dense-storage cap of 8192");
  SampleDraw d;
  d.seed = seed;
  d.replication_index = rep;
  d.latents = draw_latents(n, seed, rep);
  d.kernel = kernel_matrix(model, d.latents);
  if (with_adjacency) {
    RandomStream edges(seed, rep, streams::edges);
    d.adjacency = adjacency_matrix(model, d.kernel, edges);
  }
#ifndef NDEBUG
  // Row-sum bound on the operator norm.
  const double row_bound = static_cast<double>(n - 1) * model.sup_norm_bound();
  if (d.kernel.cwiseAbs().rowwise().sum().maxCoeff() > row_bound + 1e-9) {
    fail(ErrorKind::numeric, "kernel matrix violates the row-sum bound");
  }
#endif
  return d;
}

}  // namespace graphon_lab
