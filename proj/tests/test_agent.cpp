#include "magpc/agent.hpp"
#include "magpc/costs.hpp"
#include "magpc/disturbance.hpp"
#include "magpc/errors.hpp"
#include "magpc/trace.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>

using namespace magpc;

TEST(Tuning, SettingOneFormula) {
  Setting1Constants c;
  c.G = 2;
  c.W = 0.5;
  c.N = 3;
  c.U = 1;
  c.max_B = 0.25;
  c.kappa = 2;
  c.gamma = 0.5;
  c.T = 10000;
  c.c_eta = 1;
  const Tuning t = tune_setting1(c);
  EXPECT_DOUBLE_EQ(effective_disturbance(c), 0.5 + 2 * 0.25);
  EXPECT_NEAR(t.eta, 1.0 / (2 * 1.0 * 100), 1e-15);
  EXPECT_EQ(t.H, static_cast<int>(std::ceil(std::log(20000.0) / 0.5)));
}

TEST(Tuning, SettingTwoFormulas) {
  const Setting2Constants c{3, 2.0, 0.3, 10000, 1.0};
  const Tuning a = tune_setting2(c);
  EXPECT_NEAR(a.eta, 1.0 / 300.0, 1e-15);
  EXPECT_EQ(a.H, 28);  // ceil(ln(2*2*9*100)/0.3) = ceil(27.3..)
  const Tuning b = tune_setting2_lipschitz(c);
  EXPECT_NEAR(b.eta, 0.01, 1e-15);
  EXPECT_EQ(b.H, static_cast<int>(std::ceil(std::log(2 * 2.0 * 3 * 100) / 0.3)));
  EXPECT_THROW(tune_setting2({0, 1, 0.5, 10, 1}), ConfigError);
}

namespace {

struct ScalarRun {
  double a = 0.5, b = 0.8, w = 0.3, target = 1.0, lambda = 0.2, eta = 0.05;
  int H = 1;
};

}  // namespace

// Scalar plant, one agent, H = 1, constant disturbance, K = 0. With
// w1 = w_{t-1}, w2 = w_{t-2}, w3 = w_{t-3} (zero before round 0) the
// learner's loss is (y - c)^2 + lambda v^2 with
//   y = a (w2 + b M w3) + w1 + b M w2,  v = M w1,
// and M moves by a clipped gradient step after every round.
TEST(GpcAgent, FollowsTheHandDerivedScalarRecursion) {
  const ScalarRun s;
  const LdsSystem sys(Mat::Constant(1, 1, s.a), {Mat::Constant(1, 1, s.b)}, 1.0);
  auto cost = std::make_shared<QuadraticTracking>(TargetSignal::constant(Vec::Constant(1, s.target)),
                                                  TargetSignal::constant(Vec::Zero(1)), s.lambda);
  AgentConfig ac;
  ac.K = Mat::Zero(1, 1);
  ac.H = 1;
  ac.eta = s.eta;
  ac.setting = 1;
  ac.set = DacSet::make(1, 1, 1, 1.0, 0.5);
  ac.cost = cost;
  GpcAgent agent(sys, ac);
  DisturbanceSpec spec;
  spec.value = Vec::Constant(1, s.w);
  const DisturbanceGenerator gen(spec, 1, 1.0);
  CostAssignment costs;
  costs.per_agent = {cost};
  const Trace tr = simulate(sys, {&agent}, gen, costs, 40);

  const double r = ac.set.radius(1);
  double M = 0.0;
  for (int t = 0; t < 40; ++t) {
    EXPECT_NEAR(tr.M_hist[t][0].blocks[0](0, 0), M, 1e-12) << "round " << t;
    const double w1 = t >= 1 ? s.w : 0.0, w2 = t >= 2 ? s.w : 0.0, w3 = t >= 3 ? s.w : 0.0;
    const double y = s.a * (w2 + s.b * M * w3) + w1 + s.b * M * w2;
    const double v = M * w1;
    const double dy = s.a * s.b * w3 + s.b * w2;
    const double grad = 2 * (y - s.target) * dy + 2 * s.lambda * v * w1;
    M = std::clamp(M - s.eta * grad, -r, r);
  }
  EXPECT_NEAR(agent.params().blocks[0](0, 0), M, 1e-12);
}

TEST(GpcAgent, ZeroStepKeepsTheInitialParameter) {
  const LdsSystem sys(Mat::Constant(1, 1, 0.5), {Mat::Ones(1, 1)}, 1.0);
  auto cost = std::make_shared<QuadraticTracking>(TargetSignal::constant(Vec::Ones(1)),
                                                  TargetSignal::constant(Vec::Zero(1)), 0.1);
  AgentConfig ac;
  ac.H = 2;
  ac.setting = 1;
  ac.set = DacSet::make(2, 1, 1, 1.0, 0.5);
  ac.M_init = DacParams({Mat::Constant(1, 1, 0.2), Mat::Constant(1, 1, -0.1)});
  ac.cost = cost;
  GpcAgent agent(sys, ac);
  DisturbanceSpec spec;
  spec.value = Vec::Constant(1, 0.4);
  CostAssignment costs;
  costs.per_agent = {cost};
  simulate(sys, {&agent}, DisturbanceGenerator(spec, 1, 1.0), costs, 20);
  EXPECT_EQ(agent.params(), ac.M_init);
}

TEST(GpcAgent, RejectsBadConfigurations) {
  const LdsSystem sys(Mat::Constant(1, 1, 0.5), {Mat::Ones(1, 1)}, 1.0);
  auto cost = std::make_shared<QuadraticTracking>(TargetSignal::constant(Vec::Ones(1)),
                                                  TargetSignal::constant(Vec::Zero(1)), 0.1);
  AgentConfig ac;
  ac.H = 2;
  ac.setting = 1;
  ac.set = DacSet::make(2, 1, 1, 1.0, 0.5);
  ac.cost = cost;
  ac.M_init = DacParams({Mat::Constant(1, 1, 9.0), Mat::Zero(1, 1)});
  EXPECT_THROW(GpcAgent(sys, ac), ConfigError);
  ac.M_init = {};
  ac.scope = CostScope::kJoint;
  EXPECT_THROW(GpcAgent(sys, ac), ConfigError);
  ac.scope = CostScope::kOwn;
  ac.set = DacSet::make(3, 1, 1, 1.0, 0.5);
  EXPECT_THROW(GpcAgent(sys, ac), DimensionError);
}

TEST(GpcAgent, EnforcesTheRoundProtocol) {
  const LdsSystem sys(Mat::Constant(1, 1, 0.5), {Mat::Ones(1, 1), Mat::Ones(1, 1)}, 1.0);
  auto cost = std::make_shared<QuadraticTracking>(TargetSignal::constant(Vec::Ones(1)),
                                                  TargetSignal::constant(Vec::Zero(1)), 0.1);
  AgentConfig ac;
  ac.H = 1;
  ac.eta = 0.1;
  ac.setting = 2;
  ac.set = DacSet::make(1, 1, 1, 1.0, 0.5);
  ac.cost = cost;
  GpcAgent agent(sys, ac);
  Observation obs;
  obs.x_next = Vec::Zero(1);
  EXPECT_THROW(agent.observe(obs), ProtocolError);
  agent.act(0, Vec::Zero(1));
  EXPECT_THROW(agent.observe(obs), ProtocolError);
}
