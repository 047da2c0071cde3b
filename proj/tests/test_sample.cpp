#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "graphon_lab/sample.hpp"

using namespace graphon_lab;

TEST(RandomStream, DeterministicAndKeyed) {
  RandomStream a(7, 3, "latents"), b(7, 3, "latents"), c(7, 4, "latents"), d(7, 3, "edges");
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
  }
}

TEST(RandomStream, UniformMoments) {
  RandomStream s(1, 0, "test");
  const int N = 200'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < N; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
  }
  const double sd_mean = std::sqrt(1.0 / 12.0 / N);
  EXPECT_NEAR(sum / N, 0.5, 5 * sd_mean);
  EXPECT_NEAR(sum_sq / N, 1.0 / 3.0, 0.005);
}

TEST(Sample, LatentMeanClt) {
  const int n = 10'000;
  const auto u = draw_latents(n, 1, 0);
  double mean = 0.0;
  for (double x : u) mean += x / n;
  EXPECT_NEAR(mean, 0.5, 4.0 / std::sqrt(12.0) / std::sqrt(double(n)));
}

TEST(Sample, LatentsReproducible) {
  EXPECT_EQ(draw_latents(50, 11, 2), draw_latents(50, 11, 2));
  EXPECT_NE(draw_latents(50, 11, 2), draw_latents(50, 11, 3));
  EXPECT_NE(draw_latents(50, 11, 2), draw_latents(50, 12, 2));
}

TEST(Sample, KernelMatrixEntries) {
  const auto W = two_block_model(1.0 / 3.0, 0.6, 0.2);
  const auto u = draw_latents(120, 5, 0);
  const auto K = kernel_matrix(W, u);
  for (Eigen::Index i = 0; i < K.rows(); ++i) {
    EXPECT_EQ(K(i, i), 0.0);
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      if (i != j) EXPECT_EQ(K(i, j), W.evaluate(u[i], u[j]));
      EXPECT_EQ(K(i, j), K(j, i));
    }
  }
}

TEST(Sample, AdjacencyIsBinarySymmetricLoopFree) {
  const auto d = draw_sample(power_kernel(0.5), 150, 3, 1, true);
  ASSERT_TRUE(d.adjacency.has_value());
  const auto& A = *d.adjacency;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    EXPECT_EQ(A(i, i), 0.0);
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      EXPECT_TRUE(A(i, j) == 0.0 || A(i, j) == 1.0);
      EXPECT_EQ(A(i, j), A(j, i));
    }
  }
}

TEST(Sample, AdjacencyUsesColumnMajorLowerTriangleOrder) {
  const auto W = constant_graphon(0.4);
  const auto d = draw_sample(W, 60, 9, 4, true);
  RandomStream edges(9, 4, streams::edges);
  for (Eigen::Index j = 0; j < 60; ++j) {
    for (Eigen::Index i = j + 1; i < 60; ++i) {
      ASSERT_EQ((*d.adjacency)(i, j), edges.uniform() < 0.4 ? 1.0 : 0.0);
    }
  }
}

TEST(Sample, EdgeDensityMatchesGraphon) {
  const int n = 400;
  const auto d = draw_sample(constant_graphon(0.3), n, 2, 0, true);
  const double pairs = n * (n - 1) / 2.0;
  const double density = d.adjacency->sum() / 2.0 / pairs;
  EXPECT_NEAR(density, 0.3, 4.0 * std::sqrt(0.21 / pairs));
}

TEST(Sample, LatentsIndependentOfAdjacencyRequest) {
  const auto W = power_kernel(0.3);
  const auto a = draw_sample(W, 80, 1, 7, false);
  const auto b = draw_sample(W, 80, 1, 7, true);
  EXPECT_EQ(a.latents, b.latents);
  EXPECT_EQ(a.kernel, b.kernel);
  EXPECT_FALSE(a.adjacency.has_value());
}

TEST(Sample, OperatorNormWithinRowSumBound) {
  const int n = 200;
  const auto W = brownian_sqrt();
  const auto d = draw_sample(W, n, 4, 0, false);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.kernel, Eigen::EigenvaluesOnly);
  EXPECT_LE(es.eigenvalues().cwiseAbs().maxCoeff(), (n - 1) * W.sup_norm_bound());
}

TEST(Sample, Errors) {
  try {
    draw_sample(brownian_sqrt(), 50, 1, 0, true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_probability);
  }
  EXPECT_NO_THROW(draw_sample(brownian_sqrt(), 50, 1, 0, false));
  EXPECT_THROW(draw_latents(1, 1, 0), Error);
  EXPECT_THROW(draw_sample(power_kernel(0.5), kMaxVertices + 1, 1, 0, false), Error);
  const std::vector<double> bad = {0.2, 1.5};
  EXPECT_THROW(kernel_matrix(power_kernel(0.5), bad), Error);
}
