#include "magpc/errors.hpp"
#include "magpc/ogd_memory.hpp"
#include "magpc/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace magpc;

TEST(OgdMemory, BoundFormula) {
  EXPECT_DOUBLE_EQ(ogd_memory_bound(2, 3, 0.5, 2, 0.1, 100), 4 / 0.1 + (9 + 0.5 * 4 * 3) * 0.1 * 100);
}

TEST(OgdMemory, ComparatorMatchesGridInOneDimension) {
  Vec alpha(3);
  alpha << 0.6, 0.3, 0.2;
  const SyntheticMemoryLoss loss(alpha, 1, 1.0, 2.0, 11);
  const auto res = ogd_with_memory(loss, ball_projector(1.0), Vec::Zero(1), 0.01, 300);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 4000; ++j) {
    const Vec x = Vec::Constant(1, -1.0 + j / 2000.0);
    double s = 0;
    for (int t = 2; t < 300; ++t) s += loss.value_diag(t, x);
    best = std::min(best, s);
  }
  EXPECT_LE(res.comparator, best + 1e-9);
  EXPECT_GE(res.comparator, best - 1e-5);
}

TEST(OgdMemory, RegretStaysUnderTheBound) {
  for (int n = 0; n < 10; ++n) {
    Vec alpha = Vec::Constant(n % 4 + 1, 0.4);
    const SyntheticMemoryLoss loss(alpha, 2, 1.5, 1.0, 100 + n);
    const int H = loss.memory(), T = 1000;
    const double D0 = loss.diameter(), G0 = loss.gradient_bound(), L = loss.lipschitz();
    const double eta = D0 / std::sqrt((G0 * G0 + L * H * H * G0) * T);
    const auto res = ogd_with_memory(loss, ball_projector(1.5), Vec::Zero(2), eta, T);
    EXPECT_LE(res.regret, ogd_memory_bound(D0, G0, L, H, eta, T));
    EXPECT_EQ(res.iterates.size(), static_cast<std::size_t>(T + 1));
    for (const auto& x : res.iterates) EXPECT_LE(x.norm(), 1.5 + 1e-12);
  }
}

TEST(OgdMemory, MeasuredConstantsHoldOnTheBall) {
  Vec alpha(2);
  alpha << 0.7, 0.5;
  const SyntheticMemoryLoss loss(alpha, 3, 1.2, 0.8, 5);
  Rng rng(2);
  for (int s = 0; s < 500; ++s) {
    Vec x(3);
    for (int k = 0; k < 3; ++k) x(k) = rng.normal();
    x *= 1.2 * rng.uniform() / x.norm();
    EXPECT_LE(loss.grad_diag(s, x).norm(), loss.gradient_bound() + 1e-12);
    EXPECT_LE(loss.target(s).norm(), 0.8 + 1e-12);
  }
}

TEST(OgdMemory, RejectsShortHorizon) {
  const SyntheticMemoryLoss loss(Vec::Ones(4), 1, 1.0, 1.0, 1);
  EXPECT_THROW(ogd_with_memory(loss, ball_projector(1.0), Vec::Zero(1), 0.1, 3), ConfigError);
}
