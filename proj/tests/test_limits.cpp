#include <gtest/gtest.h>

#include <cmath>

#include "graphon_lab/limits.hpp"
#include "graphon_lab/statistics.hpp"

using namespace graphon_lab;

TEST(GaussianLimit, PowerKernelVariance) {
  const auto s = analytic_spectrum(power_kernel(0.5));
  const auto law = gaussian_law(regime_constants(s, 1));
  ASSERT_TRUE(law.is_gaussian());
  EXPECT_NEAR(law.variance(), 1.0 / 12.0, 1e-14);
  EXPECT_NEAR(law_quantile(law, 0.975), 1.959963984540054 * std::sqrt(1.0 / 12.0), 1e-9);
  EXPECT_NEAR(law_quantile(law, 0.5), 0.0, 1e-12);
  EXPECT_EQ(law_cdf_accuracy(law), 1e-10);
}

TEST(GaussianLimit, NormalCdfValues) {
  EXPECT_NEAR(normal_cdf(1.0, 1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(normal_cdf(-2.0, 4.0), 0.15865525393145707, 1e-15);
  EXPECT_EQ(normal_cdf(-1e-9, 0.0), 0.0);
  EXPECT_EQ(normal_cdf(0.0, 0.0), 1.0);
}

TEST(ChiSquareLimit, SymmetricSbm) {
  const auto s = analytic_spectrum(two_block_model(0.5, 0.6, 0.2));
  const auto c = regime_constants(s, 2);
  const auto law = chi_square_law(s, c);
  const auto& w = law.chi_square();
  ASSERT_EQ(w.coefficients.size(), 1u);
  EXPECT_EQ(w.modes[0], 1u);
  EXPECT_NEAR(w.coefficients[0], 0.2 * 0.4 / (0.2 - 0.4), 1e-14);
  EXPECT_NEAR(w.centering, -0.8, 1e-14);
  EXPECT_NEAR(law.variance(), 0.32, 1e-14);
  EXPECT_EQ(w.tail_sq_mass, 0.0);
}

TEST(ChiSquareLimit, CdfMatchesClosedForm) {
  const auto s = analytic_spectrum(two_block_model(0.5, 0.6, 0.2));
  const auto law = chi_square_law(s, regime_constants(s, 2));
  // X = -0.4 (Z^2 - 1): P(X <= x) = P(Z^2 >= 1 - 2.5 x).
  const auto exact = [](double x) {
    const double t = 1.0 - 2.5 * x;
    return t <= 0.0 ? 1.0 : std::erfc(std::sqrt(t / 2.0));
  };
  const double tol = law_cdf_accuracy(law);
  EXPECT_LT(tol, 2e-3);
  for (double x : {-2.0, -1.0, -0.5, 0.0, 0.2, 0.35, 0.399}) EXPECT_NEAR(law_cdf(law, x), exact(x), tol) << x;
  EXPECT_EQ(law_cdf(law, 0.41), 1.0);
}

TEST(ChiSquareLimit, SampleMoments) {
  const auto s = analytic_spectrum(two_block_model(0.5, 0.6, 0.2));
  const auto law = chi_square_law(s, regime_constants(s, 2));
  RandomStream stream(1, 0, streams::limit);
  const auto x = sample_law(law, 100'000, stream);
  const auto st = summarize(x);
  EXPECT_NEAR(st.mean, 0.0, 4.0 * std::sqrt(0.32 / 1e5));
  EXPECT_NEAR(st.variance, 0.32, 0.02 * 0.32);
  // Skewness of -0.4 (chi2_1 - 1) is -sqrt(8).
  EXPECT_NEAR(st.skewness, -std::sqrt(8.0), 0.3);
}

TEST(GaussianLimit, UnequalSbmVariance) {
  const auto W = two_block_model(1.0 / 3.0, 0.6, 0.2);
  const auto s = analytic_spectrum(W);
  const auto law = gaussian_law(regime_constants(s, 2));
  // Oracle: right eigenvector x of M = P diag(pi) for the smaller eigenvalue,
  // normalized so sum_b pi_b x_b^2 = 1; sigma^2 = sum_b pi_b x_b^4 - 1.
  const double pi1 = 1.0 / 3.0, pi2 = 2.0 / 3.0;
  const double a = 0.6 * pi1, b = 0.2 * pi2, c = 0.2 * pi1, d = 0.6 * pi2;
  const double tr = a + d, det = a * d - b * c;
  const double lambda = (tr - std::sqrt(tr * tr - 4 * det)) / 2;
  double x1 = b, x2 = lambda - a;
  const double norm = std::sqrt(pi1 * x1 * x1 + pi2 * x2 * x2);
  x1 /= norm;
  x2 /= norm;
  const double sigma_sq = pi1 * std::pow(x1, 4) + pi2 * std::pow(x2, 4) - 1.0;
  EXPECT_NEAR(lambda, 0.162563, 1e-6);
  EXPECT_NEAR(law.variance(), lambda * lambda * sigma_sq, 1e-12);
}

TEST(GaussianLimit, CdfAtOneSd) { EXPECT_NEAR(normal_cdf(2.0, 4.0), 0.841345, 1e-6); }

TEST(ChiSquareLimit, TruncationTracksTailMass) {
  const auto s = nystrom_spectrum(brownian_sqrt(), 256, 12);
  const auto c = regime_constants(s, 1);
  ASSERT_EQ(c.regime, Regime::non_degenerate);  // BrownianSqrt top mode is not flat
  EXPECT_THROW(chi_square_law(s, c), Error);
  EXPECT_NO_THROW(gaussian_law(c));

  const auto sym = nystrom_spectrum(two_block_model(0.5, 0.6, 0.2), 128, 6);
  const auto cs = regime_constants(sym, 2);
  const auto full = chi_square_law(sym, cs);
  EXPECT_EQ(full.chi_square().coefficients.size(), 1u);  // zero modes dropped
  EXPECT_EQ(full.chi_square().truncation, 6u);
  EXPECT_THROW(chi_square_law(sym, cs, 7), Error);
}

TEST(ChiSquareLimit, WrongRegime) {
  const auto s = analytic_spectrum(power_kernel(0.5));
  try {
    chi_square_law(s, regime_constants(s, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::wrong_regime);
  }
  const auto sym = analytic_spectrum(two_block_model(0.5, 0.6, 0.2));
  EXPECT_THROW(gaussian_law(regime_constants(sym, 2)), Error);
}

TEST(ChiSquareLimit, QuantilesMonotone) {
  const auto s = analytic_spectrum(two_block_model(0.5, 0.6, 0.2));
  const auto law = chi_square_law(s, regime_constants(s, 2));
  double prev = -1e300;
  for (double p : kQuantileLevels) {
    const double q = law_quantile(law, p);
    EXPECT_GE(q, prev);
    prev = q;
  }
  EXPECT_LE(law_quantile(law, 0.99), 0.4);
}
