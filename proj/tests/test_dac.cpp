#include "helpers.hpp"
#include "magpc/dac.hpp"
#include "magpc/errors.hpp"
#include "magpc/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace magpc;
using magpc::testing::random_matrix;

TEST(DacParams, FlattenRoundTrips) {
  Rng rng(1);
  DacParams M({random_matrix(rng, 2, 3), random_matrix(rng, 2, 3)});
  EXPECT_EQ(DacParams::unflatten(M.flatten(), 2, 2, 3), M);
  EXPECT_EQ(M.size(), 12);
  EXPECT_NEAR(M.frobenius_norm(), M.flatten().norm(), 1e-14);
}

TEST(DacSet, RadiiDecayGeometrically) {
  const DacSet s = DacSet::make(4, 1, 2, 2.0, 0.25);
  EXPECT_DOUBLE_EQ(s.tau, 8.0);
  for (int p = 1; p <= 4; ++p) EXPECT_NEAR(s.radius(p), 8.0 * std::pow(0.75, p), 1e-14);
  EXPECT_THROW(DacSet::make(0, 1, 1, 1.0, 0.5), ConfigError);
  EXPECT_THROW(DacSet::make(1, 1, 1, 1.0, 1.5), ConfigError);
}

TEST(Projection, DiagonalBlockClipsEachEntry) {
  Mat B = Mat::Zero(3, 3);
  B.diagonal() << 3, -0.5, 2;
  const Mat P = project_block(B, 1.0);
  EXPECT_NEAR(P(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(P(1, 1), -0.5, 1e-12);
  EXPECT_NEAR(P(2, 2), 1.0, 1e-12);
  EXPECT_NEAR((P - P.diagonal().asDiagonal().toDenseMatrix()).norm(), 0.0, 1e-12);
}

TEST(Projection, BeatsRandomFeasiblePointsAndIsIdempotent) {
  Rng rng(2);
  for (int n = 0; n < 20; ++n) {
    const int k = 1 + n % 3, d = 1 + (n / 3) % 3;
    const double r = rng.uniform(0.2, 1.5);
    const Mat B = random_matrix(rng, k, d, 2.0);
    const Mat P = project_block(B, r);
    EXPECT_LE(spectral_norm(P), r + 1e-12);
    EXPECT_LE((project_block(P, r) - P).cwiseAbs().maxCoeff(), 1e-12);
    for (int c = 0; c < 2000; ++c) {
      Mat C = random_matrix(rng, k, d);
      C *= rng.uniform(0, r) / spectral_norm(C);
      EXPECT_GE((C - B).norm(), (P - B).norm() - 1e-9);
    }
  }
}

TEST(Projection, FrobeniusBallScalesRadially) {
  Mat B(1, 2);
  B << 3, 4;
  const Mat P = project_block(B, 1.0, BallNorm::kFrobenius);
  EXPECT_NEAR(P(0, 0), 0.6, 1e-14);
  EXPECT_NEAR(P(0, 1), 0.8, 1e-14);
}

TEST(Projection, FlatVariantMatchesBlockwise) {
  Rng rng(3);
  for (int k : {1, 2}) {
    for (int d : {1, 3}) {
      const DacSet s = DacSet::make(3, k, d, 1.5, 0.3);
      DacParams M({random_matrix(rng, k, d, 3), random_matrix(rng, k, d, 3), random_matrix(rng, k, d, 3)});
      Vec m = M.flatten();
      project_flat(m, s);
      const DacParams P = project(M, s);
      EXPECT_LE((m - P.flatten()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_TRUE(membership(P, s));
      EXPECT_FALSE(membership(M, s));
    }
  }
}

TEST(Dac, DiameterCoversRandomMembers) {
  const DacSet s = DacSet::make(3, 2, 2, 1.5, 0.3);
  const double D = diameter(s);
  for (int n = 0; n < 200; ++n) {
    const DacParams a = random_member(s, 2 * n), b = random_member(s, 2 * n + 1);
    EXPECT_TRUE(membership(a, s));
    EXPECT_LE((a - b).frobenius_norm(), D);
  }
}

TEST(DisturbanceBuffer, LagsAreNewestFirst) {
  DisturbanceBuffer buf(3, 1);
  EXPECT_EQ(buf.lag(1)(0), 0.0);
  for (int v = 1; v <= 5; ++v) buf.push(Vec::Constant(1, v));
  EXPECT_EQ(buf.lag(1)(0), 5);
  EXPECT_EQ(buf.lag(3)(0), 3);
  const auto w = buf.window(3);
  EXPECT_EQ(w[0](0), 5);
  EXPECT_EQ(w[2](0), 3);
  EXPECT_EQ(buf.count(), 3);
}

TEST(Dac, ControlCombinesFeedbackAndMemory) {
  DisturbanceBuffer buf(2, 2);
  Vec w1(2), w2(2);
  w1 << 1, 0;
  w2 << 0, 1;
  buf.push(w1);
  buf.push(w2);
  Mat K(1, 2), M1(1, 2), M2(1, 2);
  K << 1, 1;
  M1 << 2, 3;
  M2 << 5, 7;
  Vec x(2);
  x << 1, -2;
  const Vec u = control(K, DacParams({M1, M2}), buf, x);
  // -K x + M1 w2 + M2 w1
  EXPECT_DOUBLE_EQ(u(0), 1.0 + 3.0 + 5.0);
}
