#include "helpers.hpp"
#include "magpc/disturbance.hpp"
#include "magpc/errors.hpp"
#include "magpc/lds.hpp"
#include "magpc/policy.hpp"
#include "magpc/trace.hpp"

#include <gtest/gtest.h>

#include <memory>

using namespace magpc;
using magpc::testing::random_matrix;
using magpc::testing::random_vector;

TEST(Lds, StepAddsEveryInputChannel) {
  Mat A(2, 2);
  A << 1, 2, 3, 4;
  Mat B1(2, 1), B2(2, 1);
  B1 << 1, 0;
  B2 << 0, 2;
  const LdsSystem sys(A, {B1, B2}, 1.0);
  Vec x(2), u1(1), u2(1), w(2);
  x << 1, 1;
  u1 << 3;
  u2 << -1;
  w << 0.5, 0.25;
  const Vec next = step(sys, x, {u1, u2}, w);
  EXPECT_DOUBLE_EQ(next(0), 1 + 2 + 3 + 0.5);
  EXPECT_DOUBLE_EQ(next(1), 3 + 4 - 2 + 0.25);
}

TEST(Lds, ValidateRejectsMismatchedShapes) {
  EXPECT_THROW(LdsSystem(Mat::Identity(2, 2), {Mat::Ones(3, 1)}, 1.0), DimensionError);
  EXPECT_THROW(LdsSystem(Mat::Ones(2, 3), {Mat::Ones(2, 1)}, 1.0), DimensionError);
  EXPECT_THROW(LdsSystem(Mat::Identity(2, 2), {Mat::Ones(2, 1)}, -1.0), Error);
}

TEST(Lds, RecoveryRecoversTheRightSignalPerSetting) {
  Rng rng(3);
  const int d = 3;
  const LdsSystem sys(random_matrix(rng, d, d), {random_matrix(rng, d, 2), random_matrix(rng, d, 1),
                                                random_matrix(rng, d, 2)},
                      1.0);
  const Vec x = random_vector(rng, d);
  const std::vector<Vec> u{random_vector(rng, 2), random_vector(rng, 1), random_vector(rng, 2)};
  const Vec w = random_vector(rng, d, 0.1);
  const Vec next = step(sys, x, u, w);
  const Vec others = sys.B[0] * u[0] + sys.B[2] * u[2];
  EXPECT_LE((aggregate_other(sys, 1, u) - others).norm(), 1e-12);
  const Vec w2 = recover_disturbance(sys, 1, 2, x, next, u[1], others);
  EXPECT_LE((w2 - w).norm(), 1e-12);
  const Vec w1 = recover_disturbance(sys, 1, 1, x, next, u[1], std::nullopt);
  EXPECT_LE((w1 - (w + others)).norm(), 1e-12);
}

TEST(Disturbance, RespectsTheBound) {
  DisturbanceSpec spec;
  spec.kind = DisturbanceKind::kClippedGaussian;
  spec.sigma = 5.0;
  spec.seed = 9;
  const DisturbanceGenerator gen(spec, 3, 0.7);
  for (int t = 0; t < 500; ++t) EXPECT_LE(gen.generate(t).norm(), 0.7 + 1e-12);
}

TEST(Disturbance, IsAPureFunctionOfTheRound) {
  DisturbanceSpec spec;
  spec.kind = DisturbanceKind::kSinusoidal;
  spec.amplitude = 0.4;
  spec.period = 10;
  spec.seed = 4;
  const DisturbanceGenerator a(spec, 2, 1.0), b(spec, 2, 1.0);
  EXPECT_EQ(a.generate(17), b.generate(17));
  EXPECT_LE((a.generate(3) - a.generate(13)).norm(), 1e-12);
  EXPECT_EQ(a.generate(5), a.generate(5));
}

TEST(Disturbance, ExplicitSequenceWrapsAround) {
  DisturbanceSpec spec;
  spec.kind = DisturbanceKind::kExplicitSequence;
  spec.sequence = {Vec::Constant(1, 0.1), Vec::Constant(1, -0.2), Vec::Constant(1, 0.3)};
  const DisturbanceGenerator gen(spec, 1, 1.0);
  EXPECT_DOUBLE_EQ(gen.generate(4)(0), -0.2);
  EXPECT_FALSE(gen.is_constant());
}

TEST(Disturbance, KindNamesRoundTrip) {
  for (auto k : {DisturbanceKind::kConstant, DisturbanceKind::kClippedGaussian, DisturbanceKind::kSinusoidal,
                 DisturbanceKind::kSignSwitching, DisturbanceKind::kBernoulliScalar,
                 DisturbanceKind::kExplicitSequence}) {
    EXPECT_EQ(disturbance_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(disturbance_kind_from_string("nope"), ConfigError);
}

TEST(Simulate, TraceReplaysAndRecoveryIsExact) {
  Rng rng(5);
  const int d = 2;
  const LdsSystem sys(magpc::testing::with_spectral_radius(random_matrix(rng, d, d), 0.7),
                      {random_matrix(rng, d, 1), random_matrix(rng, d, 1)}, 0.5);
  LinearPolicy p0(sys, 0, Mat::Zero(1, d), 1);
  LinearPolicy p1(sys, 1, 0.1 * Mat::Ones(1, d), 2);
  DisturbanceSpec spec;
  spec.kind = DisturbanceKind::kClippedGaussian;
  spec.sigma = 0.3;
  spec.seed = 1;
  const DisturbanceGenerator gen(spec, d, sys.W);
  CostAssignment costs;
  costs.shared = nullptr;
  struct Zero : CostOracle {
    int state_dim() const override { return 2; }
    int control_dim() const override { return 1; }
    double value(int, const Vec& x, const Vec&) const override { return x.squaredNorm(); }
    Vec grad_x(int, const Vec& x, const Vec&) const override { return 2 * x; }
    Vec grad_u(int, const Vec&, const Vec& u) const override { return Vec::Zero(u.size()); }
    CostConstants constants(double) const override { return {}; }
    bool time_invariant() const override { return true; }
    std::string name() const override { return "state-norm"; }
  };
  auto c = std::make_shared<Zero>();
  costs.per_agent = {c, c};
  const Trace tr = simulate(sys, {&p0, &p1}, gen, costs, 200);
  ASSERT_EQ(tr.T, 200);
  EXPECT_EQ(replay_error(tr, sys), 0.0);
  EXPECT_LE(recovery_error(tr, sys), 1e-12);
  // Independent check of the first agent's view: w + B_1 u^1.
  for (int t = 0; t < tr.T; ++t) {
    const Vec expect = tr.w[t] + sys.B[1] * tr.u[t][1];
    EXPECT_LE((tr.w_est[t][0] - expect).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((tr.w_est[t][1] - tr.w[t]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(tr.cost[t][0], tr.x[t].squaredNorm(), 1e-15);
  }
}

TEST(Simulate, DivergenceIsReported) {
  const LdsSystem sys(Mat::Constant(1, 1, 3.0), {Mat::Ones(1, 1)}, 1.0);
  LinearPolicy p(sys, 0, Mat::Zero(1, 1), 1);
  DisturbanceSpec spec;
  spec.value = Vec::Ones(1);
  const DisturbanceGenerator gen(spec, 1, 1.0);
  CostAssignment costs;
  struct Flat : CostOracle {
    int state_dim() const override { return 1; }
    int control_dim() const override { return 1; }
    double value(int, const Vec&, const Vec&) const override { return 0.0; }
    Vec grad_x(int, const Vec& x, const Vec&) const override { return Vec::Zero(x.size()); }
    Vec grad_u(int, const Vec&, const Vec& u) const override { return Vec::Zero(u.size()); }
    CostConstants constants(double) const override { return {}; }
    bool time_invariant() const override { return true; }
    std::string name() const override { return "flat"; }
  };
  costs.per_agent = {std::make_shared<Flat>()};
  EXPECT_THROW(simulate(sys, {&p}, gen, costs, 200), DivergenceError);
}
