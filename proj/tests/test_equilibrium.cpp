#include "magpc/costs.hpp"
#include "magpc/equilibrium.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace magpc;

namespace {

struct Duopoly {
  LdsSystem sys{Mat::Constant(1, 1, 0.5), {Mat::Ones(1, 1), Mat::Constant(1, 1, 0.7)}, 1.0};
  QuadraticTracking cost{TargetSignal::constant(Vec::Ones(1)), TargetSignal::constant(Vec::Zero(2)), 0.1};
  JointGame game{sys, {Mat::Zero(1, 1), Mat::Zero(1, 1)}, 1, cost};
  DacSet set = DacSet::make(1, 1, 1, 1.0, 0.5);
  std::vector<Vec> dist{Vec::Constant(1, 0.5), Vec::Constant(1, -0.3), Vec::Constant(1, 0.8)};
};

double loss_with(const Duopoly& g, int i, double m, const std::vector<DacParams>& M) {
  std::vector<DacParams> N = M;
  N[i] = DacParams({Mat::Constant(1, 1, m)});
  return joint_loss(g.game, 5, N, g.dist);
}

}  // namespace

TEST(Equilibrium, PastWindowIsNewestFirstAndZeroPadded) {
  const std::vector<Vec> w{Vec::Constant(1, 1), Vec::Constant(1, 2), Vec::Constant(1, 3)};
  const auto win = past_window(w, 2, 4, 1);
  EXPECT_EQ(win[0](0), 2);
  EXPECT_EQ(win[1](0), 1);
  EXPECT_EQ(win[2](0), 0);
  EXPECT_EQ(win[3](0), 0);
}

TEST(Equilibrium, BestResponseMatchesGridSearch) {
  const Duopoly g;
  const std::vector<DacParams> M{DacParams({Mat::Constant(1, 1, 0.1)}), DacParams({Mat::Constant(1, 1, -0.2)})};
  const double r = g.set.radius(1);
  for (int i : {0, 1}) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 20000; ++j) best = std::min(best, loss_with(g, i, -r + 2 * r * j / 20000.0, M));
    const BestResponse br = best_response_gap(g.game, 5, i, M, g.dist, g.set);
    EXPECT_LE(br.loss_best, best + 1e-9);
    EXPECT_GE(br.loss_best, best - 1e-6);
    EXPECT_NEAR(br.loss_now, joint_loss(g.game, 5, M, g.dist), 1e-14);
    EXPECT_GE(br.gap, 0.0);
  }
}

TEST(Equilibrium, GapVanishesAtTheBestResponse) {
  const Duopoly g;
  std::vector<DacParams> M{DacParams({Mat::Constant(1, 1, 0.1)}), DacParams({Mat::Constant(1, 1, -0.2)})};
  M[0] = best_response_gap(g.game, 5, 0, M, g.dist, g.set).M_best;
  EXPECT_LE(best_response_gap(g.game, 5, 0, M, g.dist, g.set).gap, 1e-7);
}

TEST(Equilibrium, SmoothnessBracketsTheHessian) {
  const Duopoly g;
  // The joint loss is quadratic in (m1, m2); read its Hessian off values.
  auto f = [&](double a, double b) {
    return joint_loss(g.game, 5, {DacParams({Mat::Constant(1, 1, a)}), DacParams({Mat::Constant(1, 1, b)})}, g.dist);
  };
  const double h = 0.1;
  const double f00 = f(0, 0);
  Eigen::Matrix2d Hs;
  Hs(0, 0) = (f(h, 0) - 2 * f00 + f(-h, 0)) / (h * h);
  Hs(1, 1) = (f(0, h) - 2 * f00 + f(0, -h)) / (h * h);
  Hs(0, 1) = Hs(1, 0) = (f(h, h) - f(h, 0) - f(0, h) + f00) / (h * h);
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(Hs).eigenvalues().maxCoeff();
  SmoothnessOptions o;
  o.safety = 1.0;
  const double L = estimate_smoothness(g.game, {g.set, g.set}, {g.dist}, o);
  EXPECT_LE(L, lmax * (1 + 1e-6));
  EXPECT_GE(L, lmax * 0.99);
}

TEST(Equilibrium, DistinctWindowsDeduplicate) {
  const std::vector<Vec> w(20, Vec::Constant(1, 0.5));
  // Zero-padded start-up windows differ; after the window fills they repeat.
  EXPECT_EQ(distinct_windows(w, 20, 3, 1).size(), 4u);
}
