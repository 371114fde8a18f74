#include "helpers.hpp"
#include "magpc/errors.hpp"
#include "magpc/linalg.hpp"
#include "magpc/stability.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace magpc;
using magpc::testing::random_matrix;

TEST(Certify, DiagonalSystemHasExactMargins) {
  Mat A = Mat::Zero(2, 2);
  A.diagonal() << 0.5, -0.25;
  const StabilityCertificate c = certify(A, Mat::Zero(2, 1), Mat::Zero(1, 2));
  EXPECT_NEAR(c.spectral_radius, 0.5, 1e-12);
  EXPECT_NEAR(c.gamma, 0.5, 1e-12);
  EXPECT_NEAR(c.condition, 1.0, 1e-12);
  EXPECT_GE(c.kappa, 1.0);
  EXPECT_TRUE(validate_certificate(c, A, Mat::Zero(1, 2)));
}

TEST(Certify, WitnessReconstructsTheClosedLoop) {
  Rng rng(7);
  for (int n = 0; n < 20; ++n) {
    const int d = 1 + n % 4;
    const Mat A = magpc::testing::with_spectral_radius(random_matrix(rng, d, d), 0.8);
    const Mat B = random_matrix(rng, d, 1);
    const Mat K = 0.05 * random_matrix(rng, 1, d);
    const Mat Acl = A - B * K;
    try {
      const StabilityCertificate c = certify(A, B, K);
      const Eigen::MatrixXcd rebuilt = c.Q * c.Lmat * c.Q.inverse();
      EXPECT_LE((rebuilt - Acl.cast<std::complex<double>>()).norm(), 1e-8);
      EXPECT_LE(spectral_norm(c.Lmat.cwiseAbs()), 1.0 - c.gamma + 1e-9);
      EXPECT_LE(K.norm(), c.kappa + 1e-12);
      EXPECT_TRUE(validate_certificate(c, Acl, K));
    } catch (const NotStabilizingError&) {
    }
  }
}

TEST(Certify, UnstableLoopIsRejected) {
  const Mat A = Mat::Identity(2, 2) * 1.2;
  EXPECT_THROW(certify(A, Mat::Zero(2, 1), Mat::Zero(1, 2)), NotStabilizingError);
}

TEST(Certify, JordanBlockIsRejected) {
  Mat A(2, 2);
  A << 0.5, 1, 0, 0.5;
  EXPECT_THROW(certify(A, Mat::Zero(2, 1), Mat::Zero(1, 2)), DefectiveMatrixError);
}

TEST(Certify, GlobalMatchesStackedSingleAgent) {
  Rng rng(9);
  const Mat A = magpc::testing::with_spectral_radius(random_matrix(rng, 3, 3), 0.6);
  const Mat B1 = random_matrix(rng, 3, 1), B2 = random_matrix(rng, 3, 2);
  const Mat K1 = 0.05 * random_matrix(rng, 1, 3), K2 = 0.05 * random_matrix(rng, 2, 3);
  const auto g = certify_global(A, {B1, B2}, {K1, K2});
  Mat B(3, 3), K(3, 3);
  B << B1, B2;
  K << K1, K2;
  const auto s = certify(A, B, K);
  EXPECT_NEAR(g.spectral_radius, s.spectral_radius, 1e-10);
  EXPECT_NEAR(g.gamma, s.gamma, 1e-10);
}

TEST(Certify, OverrideOnlyLoosens) {
  Mat A = Mat::Zero(1, 1);
  A(0, 0) = 0.5;
  const auto c = certify(A, Mat::Zero(1, 1), Mat::Zero(1, 1));
  const auto looser = with_override(c, c.kappa * 2, c.gamma / 2);
  EXPECT_TRUE(looser.overridden);
  EXPECT_THROW(with_override(c, c.kappa, c.gamma * 1.5), ConfigError);
}

TEST(Synthesize, ScalarGainMatchesRiccatiFixedPoint) {
  // Scalar plant a, b with unit weights: P = 1 + a^2 P - (abP)^2 / (1 + b^2 P).
  const double a = 1.3, b = 0.7;
  double P = 1.0;
  for (int i = 0; i < 100000; ++i) P = 1 + a * a * P - (a * b * P) * (a * b * P) / (1 + b * b * P);
  const double k = a * b * P / (1 + b * b * P);
  const Mat K = synthesize(Mat::Constant(1, 1, a), Mat::Constant(1, 1, b));
  EXPECT_NEAR(K(0, 0), k, 1e-9);
  EXPECT_LT(std::abs(a - b * K(0, 0)), 1.0);
}
