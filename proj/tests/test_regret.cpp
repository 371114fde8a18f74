#include "magpc/agent.hpp"
#include "magpc/costs.hpp"
#include "magpc/disturbance.hpp"
#include "magpc/errors.hpp"
#include "magpc/policy.hpp"
#include "magpc/random.hpp"
#include "magpc/regret.hpp"
#include "magpc/trace.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

using namespace magpc;

namespace {

// Scalar plant x' = a x + b u + w with a learning DAC agent on a tracking cost.
struct ScalarScenario {
  LdsSystem sys{Mat::Constant(1, 1, 0.5), {Mat::Constant(1, 1, 1.0)}, 0.5};
  std::shared_ptr<QuadraticTracking> cost = std::make_shared<QuadraticTracking>(
      TargetSignal::sinusoidal(Vec::Constant(1, 0.6), 0.3, 15, 3), TargetSignal::constant(Vec::Zero(1)), 0.2);
  CostAssignment costs;
  DacSet set = DacSet::make(1, 1, 1, 1.0, 0.5);
  Trace trace;

  explicit ScalarScenario(double eta, int T = 200) {
    costs.per_agent = {cost};
    AgentConfig ac;
    ac.H = 1;
    ac.eta = eta;
    ac.setting = 1;
    ac.set = set;
    ac.cost = cost;
    GpcAgent agent(sys, ac);
    DisturbanceSpec spec;
    spec.kind = DisturbanceKind::kSinusoidal;
    spec.amplitude = 0.4;
    spec.period = 11;
    spec.seed = 5;
    trace = simulate(sys, {&agent}, DisturbanceGenerator(spec, 1, sys.W), costs, T);
  }
};

}  // namespace

TEST(Rollout, ReplayReproducesRecordedCosts) {
  const ScalarScenario s(0.05);
  const RolloutResult r = counterfactual_rollout(s.trace, s.sys, 0, ReplayComparator{}, s.costs, 1);
  ASSERT_EQ(r.cost.size(), static_cast<std::size_t>(s.trace.T));
  for (int t = 0; t < s.trace.T; ++t) EXPECT_NEAR(r.cost[t], s.trace.cost[t][0], 1e-12);
  for (int t = 0; t <= s.trace.T; ++t) EXPECT_NEAR(r.x[t](0), s.trace.x[t](0), 1e-12);
}

TEST(Rollout, FrozenDacComparatorMatchesAFrozenAgent) {
  const ScalarScenario s(0.0);
  const RolloutResult r =
      counterfactual_rollout(s.trace, s.sys, 0, DacComparator{Mat::Zero(1, 1), DacParams::zeros(1, 1, 1)}, s.costs, 1);
  EXPECT_NEAR(r.total(), s.trace.total_cost(0), 1e-10);
}

TEST(BestDac, MatchesAGridSearchInOneDimension) {
  const ScalarScenario s(0.05);
  const ComparatorResult best = best_dac(s.trace, s.sys, 0, 1, s.costs, s.set, 0);
  const double r = s.set.radius(1);
  double grid_min = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 2000; ++j) {
    const double m = -r + 2 * r * j / 2000.0;
    const DacComparator c{Mat::Zero(1, 1), DacParams({Mat::Constant(1, 1, m)})};
    grid_min = std::min(grid_min, counterfactual_rollout(s.trace, s.sys, 0, c, s.costs, 1).total());
  }
  EXPECT_LE(best.cost_full, grid_min + 1e-9);
  EXPECT_GE(best.cost_full, grid_min - 1e-4 * std::abs(grid_min));
  EXPECT_TRUE(best.converged);
}

TEST(BestDac, GenericAndQuadraticSolversAgree) {
  const ScalarScenario s(0.05);
  DacSolverOptions generic;
  generic.force_generic = true;
  const ComparatorResult a = best_dac(s.trace, s.sys, 0, 1, s.costs, s.set, 10);
  const ComparatorResult b = best_dac(s.trace, s.sys, 0, 1, s.costs, s.set, 10, generic);
  EXPECT_NEAR(a.cost_full, b.cost_full, 1e-6 * std::abs(a.cost_full));
  EXPECT_NEAR(a.cost_post, b.cost_post, 1e-6 * std::abs(a.cost_post));
}

TEST(Regret, SingletonComparatorGivesZeroRegret) {
  const ScalarScenario s(0.0);
  const DacSet point = DacSet::make(1, 1, 1, 1.0, 0.5, BallNorm::kSpectral, 1e-300);
  const RegretReport rep = regret(s.trace, 0, best_dac(s.trace, s.sys, 0, 1, s.costs, point, 0));
  EXPECT_NEAR(rep.regret_full, 0.0, 1e-9);
}

TEST(BestLinear, MatchesBruteForceOverStableGains) {
  const ScalarScenario s(0.05);
  const double kappa = 2.0, gamma = 0.22;
  LinearGrid grid{{-1.0}, {1.0}, 41};
  const ComparatorResult best = best_linear(s.trace, s.sys, 0, s.costs, grid, kappa, gamma, 0);
  double brute = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 41; ++j) {
    const double k = -1.0 + 2.0 * j / 40.0;
    if (std::abs(k) > kappa || std::abs(0.5 - k) > 1 - gamma) continue;
    brute = std::min(brute, counterfactual_rollout(s.trace, s.sys, 0, LinearComparator{Mat::Constant(1, 1, k)}, s.costs, 1).total());
  }
  EXPECT_NEAR(best.cost_full, brute, 1e-12 * std::abs(brute));
}

TEST(Slope, RecoversAPowerLaw) {
  std::vector<double> x, y;
  for (double t : {100.0, 400.0, 1600.0, 6400.0}) {
    x.push_back(t);
    y.push_back(3 * std::pow(t, 0.5));
  }
  EXPECT_NEAR(loglog_slope(x, y), 0.5, 1e-12);
}

TEST(Curve, SummaryNeedsThreePositivePoints) {
  std::map<int, std::vector<TrialRegret>> samples{{100, {{10, 5}, {12, 7}}}, {400, {{20, 9}, {22, 11}}}};
  const RegretCurve two = summarize_curve({100, 400}, samples);
  EXPECT_FALSE(two.slope.has_value());
  EXPECT_DOUBLE_EQ(two.points[0].mean, 11.0);
  samples[1600] = {{40, 20}, {44, 22}};
  const RegretCurve three = summarize_curve({100, 400, 1600}, samples);
  ASSERT_TRUE(three.slope.has_value());
  // Least-squares slope of log(11, 21, 42) against log(100, 400, 1600).
  const double lx[] = {std::log(100.0), std::log(400.0), std::log(1600.0)};
  const double ly[] = {std::log(11.0), std::log(21.0), std::log(42.0)};
  const double mx = (lx[0] + lx[1] + lx[2]) / 3, my = (ly[0] + ly[1] + ly[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  EXPECT_NEAR(*three.slope, sxy / sxx, 1e-12);
}

TEST(LowerBound, LinearPhiMatchesSimulatedPlant) {
  const int T = 60;
  std::vector<int> bits;
  Rng rng(3);
  for (int t = 0; t <= T; ++t) bits.push_back(rng.bernoulli(0.5));
  const std::vector<double> gains{0.0, 0.3, 0.9, 1.0};
  const auto phi = lower_bound_phi_linear(bits, 1.0, gains);
  for (std::size_t j = 0; j < gains.size(); ++j) {
    const LdsSystem sys(Mat::Zero(1, 1), {Mat::Constant(1, 1, 0.5)}, 1.0);
    LinearPolicy p(sys, 0, Mat::Constant(1, 1, -gains[j]), 1);
    CostAssignment costs;
    costs.per_agent = {std::make_shared<LowerBoundCost>(1, bits)};
    DisturbanceSpec spec;
    spec.value = Vec::Zero(1);
    SimulationOptions opts;
    opts.x0 = Vec::Ones(1);
    const Trace tr = simulate(sys, {&p}, DisturbanceGenerator(spec, 1, 1.0), costs, T + 1, opts);
    EXPECT_NEAR(phi[j], tr.total_cost(0, 1), 1e-12) << "gain " << gains[j];
  }
}

TEST(LowerBound, DacPhiMatchesSimulatedPlant) {
  const int T = 50, H = 3;
  std::vector<int> bits;
  Rng rng(4);
  for (int t = 0; t <= T; ++t) bits.push_back(rng.bernoulli(0.5));
  const std::vector<double> values{-0.4, 0.0, 0.25};
  const auto phi = lower_bound_phi_dac(bits, H, values);
  const LdsSystem sys(Mat::Zero(1, 1), {Mat::Ones(1, 1)}, 1.0);
  for (std::size_t j = 0; j < values.size(); ++j) {
    auto cost = std::make_shared<LowerBoundCost>(1, bits);
    AgentConfig ac;
    ac.H = H;
    ac.setting = 1;
    ac.set = DacSet::make(H, 1, 1, 2.0, 0.5);
    ac.M_init = DacParams(std::vector<Mat>(H, Mat::Constant(1, 1, values[j])));
    ac.cost = cost;
    GpcAgent agent(sys, ac);
    CostAssignment costs;
    costs.per_agent = {cost};
    DisturbanceSpec spec;
    spec.value = Vec::Ones(1);
    const Trace tr = simulate(sys, {&agent}, DisturbanceGenerator(spec, 1, 1.0), costs, T + 1);
    EXPECT_NEAR(phi[j], tr.total_cost(0, 1), 1e-12) << "value " << values[j];
  }
}

TEST(LowerBound, ExperimentIsDeterministic) {
  LowerBoundOptions o;
  o.kind = LowerBoundKind::kDac;
  o.T_grid = {50, 200};
  o.trials = 4;
  o.seed = 9;
  const auto a = lower_bound_experiment(o);
  const auto b = lower_bound_experiment(o);
  ASSERT_EQ(a.rows.size(), 2u);
  EXPECT_EQ(a.rows[1].mean_regret, b.rows[1].mean_regret);
  EXPECT_EQ(a.trial_regret, b.trial_regret);
}
