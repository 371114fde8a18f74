#include "helpers.hpp"
#include "magpc/costs.hpp"
#include "magpc/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace magpc;
using magpc::testing::random_vector;

namespace {

Vec fd_grad(const std::function<double(const Vec&)>& f, const Vec& z, double h = 1e-6) {
  Vec g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    Vec a = z, b = z;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST(QuadraticTracking, ValueMatchesDefinition) {
  Vec a(2), b(1);
  a << 1, -1;
  b << 0.5;
  const QuadraticTracking c(TargetSignal::constant(a), TargetSignal::constant(b), 0.3);
  Vec x(2), u(1);
  x << 2, 0;
  u << 1.5;
  EXPECT_DOUBLE_EQ(c.value(0, x, u), 1 + 1 + 0.3 * 1.0);
  EXPECT_TRUE(c.time_invariant());
}

TEST(QuadraticTracking, GradientsMatchFiniteDifferences) {
  Rng rng(1);
  const QuadraticTracking c(TargetSignal::sinusoidal(random_vector(rng, 3), 0.5, 17, 2),
                            TargetSignal::constant(random_vector(rng, 2)), 0.7);
  for (int t : {0, 5, 33}) {
    const Vec x = random_vector(rng, 3), u = random_vector(rng, 2);
    const Vec gx = fd_grad([&](const Vec& z) { return c.value(t, z, u); }, x);
    const Vec gu = fd_grad([&](const Vec& z) { return c.value(t, x, z); }, u);
    EXPECT_LE((c.grad_x(t, x, u) - gx).norm(), 1e-6);
    EXPECT_LE((c.grad_u(t, x, u) - gu).norm(), 1e-6);
  }
}

TEST(QuadraticTracking, QuadraticModelReproducesValues) {
  Rng rng(2);
  const QuadraticTracking c(TargetSignal::sinusoidal(random_vector(rng, 2), 0.5, 9, 3),
                            TargetSignal::constant(random_vector(rng, 1)), 0.2);
  for (int t : {0, 4}) {
    const auto q = c.quadratic_model(t);
    ASSERT_TRUE(q.has_value());
    const Vec x = random_vector(rng, 2), u = random_vector(rng, 1);
    Vec z(3);
    z << x, u;
    EXPECT_NEAR(0.5 * z.dot(q->H * z) + q->g.dot(z) + q->c0, c.value(t, x, u), 1e-12);
  }
}

TEST(QuadraticTracking, ConstantsHoldOnTheBall) {
  Rng rng(3);
  const QuadraticTracking c(TargetSignal::sinusoidal(random_vector(rng, 2, 0.3), 0.4, 12, 5),
                            TargetSignal::constant(Vec::Zero(2)), 0.5);
  const double D = 2.0;
  const CostConstants k = c.constants(D);
  for (int s = 0; s < 2000; ++s) {
    Vec x = random_vector(rng, 2), u = random_vector(rng, 2);
    x *= D * rng.uniform() / x.norm();
    u *= D * rng.uniform() / u.norm();
    const int t = s % 40;
    EXPECT_LE(std::abs(c.value(t, x, u)), k.beta * D * D + 1e-12);
    EXPECT_LE(c.grad_x(t, x, u).norm(), k.G * D + 1e-12);
    EXPECT_LE(c.grad_u(t, x, u).norm(), k.G * D + 1e-12);
  }
}

TEST(DeltaCost, ClosedFormDominatesSampling) {
  Rng rng(4);
  const QuadraticTracking c(TargetSignal::sinusoidal(random_vector(rng, 2), 0.6, 10, 7),
                            TargetSignal::constant(Vec::Zero(1)), 0.1);
  for (int t : {0, 3, 8}) {
    const DeltaCost exact = delta_cost(c, t, 1.5);
    EXPECT_FALSE(exact.estimate);
    const double sampled = delta_cost_sampled(c, t, 1.5, 11, 20000);
    EXPECT_LE(sampled, exact.value + 1e-12);
    EXPECT_GE(sampled, 0.9 * exact.value - 1e-9);
  }
}

TEST(DeltaCost, FrozenCostHasNoVariation) {
  const QuadraticTracking c(TargetSignal::constant(Vec::Ones(2)), TargetSignal::constant(Vec::Zero(1)), 0.1);
  EXPECT_EQ(delta_cost(c, 4, 3.0).value, 0.0);
}

TEST(LowerBoundCost, MatchesBitFormula) {
  const LowerBoundCost c(1, std::vector<int>{1, 0, 0, 1});
  const Vec x = Vec::Zero(1);
  EXPECT_DOUBLE_EQ(c.value(0, x, Vec::Constant(1, 2.0)), 2.0 * 0.5 + 0.5);
  EXPECT_DOUBLE_EQ(c.value(1, x, Vec::Constant(1, 2.0)), -2.0 * 0.5 + 0.5);
  EXPECT_DOUBLE_EQ(c.grad_u(5, x, Vec::Zero(1))(0), -0.5);
  EXPECT_EQ(c.bit(7), 1);
}

TEST(LowerBoundCost, SeededBitsAreBalanced) {
  const LowerBoundCost c(1, 123);
  int ones = 0;
  for (int t = 0; t < 20000; ++t) ones += c.bit(t);
  EXPECT_NEAR(ones / 20000.0, 0.5, 0.02);
}

TEST(LinearCost, ValueAndGradients) {
  Vec gx(2), gu(1);
  gx << 1, -2;
  gu << 3;
  const LinearCost c(gx, gu, 0.5);
  Vec x(2), u(1);
  x << 1, 1;
  u << 2;
  EXPECT_DOUBLE_EQ(c.value(0, x, u), 1 - 2 + 6 + 0.5);
  EXPECT_EQ(c.grad_x(0, x, u), gx);
  EXPECT_EQ(c.grad_u(0, x, u), gu);
}

TEST(CostAssignment, JointCostSeesEveryControl) {
  const auto shared = std::make_shared<QuadraticTracking>(TargetSignal::constant(Vec::Zero(1)),
                                                          TargetSignal::constant(Vec::Zero(2)), 1.0);
  CostAssignment ca;
  ca.shared = shared;
  const std::vector<Vec> u{Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)};
  EXPECT_DOUBLE_EQ(ca.agent_cost(0, 0, Vec::Constant(1, 1.0), u), 1 + 1 + 4);
  EXPECT_DOUBLE_EQ(ca.agent_cost(1, 0, Vec::Constant(1, 1.0), u), 6);
}

TEST(TargetSignal, SinusoidRespectsItsEnvelope) {
  Vec off(3);
  off << 1, 2, 3;
  const TargetSignal s = TargetSignal::sinusoidal(off, 0.5, 7, 1);
  for (int t = 0; t < 100; ++t) EXPECT_LE((s.at(t) - off).norm(), 0.5 + 1e-12);
  EXPECT_LE(s.sup_norm(), off.norm() + 0.5 + 1e-12);
  EXPECT_FALSE(s.frozen());
}
