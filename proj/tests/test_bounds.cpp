#include "magpc/agent.hpp"
#include "magpc/bound_audit.hpp"
#include "magpc/bounds.hpp"
#include "magpc/disturbance.hpp"
#include "magpc/stability.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

using namespace magpc;

TEST(Bounds, ClosedForms) {
  BoundInputs in;
  in.kappa = 2;
  in.gamma = 0.25;
  in.W = 0.5;
  in.sum_B = 1.5;
  in.max_B = 1;
  in.H = 3;
  in.d = 2;
  in.tau = 8;
  EXPECT_DOUBLE_EQ(uniform_radius(in), 6 * 8 / 0.25 * 0.5 * (1 + 4 * 3 * 1.5));
  EXPECT_NEAR(transfer_norm_bound(in, 2), 2 * 0.5625 + 3 * 2 * 8 * 1.5 * 0.75, 1e-12);
  EXPECT_NEAR(transfer_norm_bound(in, 5), 3 * 2 * 8 * 1.5 * std::pow(0.75, 4), 1e-12);
  EXPECT_NEAR(surrogate_deviation_bound(in, 2, 3), 2 * 2 * 9 * std::pow(0.75, 3), 1e-12);
  EXPECT_FALSE(memory_long_enough(in));  // ln(4) / 0.25 > H + 1 = 4
  in.H = 5;
  EXPECT_TRUE(memory_long_enough(in));
}

namespace {

struct AuditRun {
  LdsSystem sys{Mat::Constant(1, 1, 0.3), {Mat::Ones(1, 1), Mat::Constant(1, 1, 0.5)}, 0.5};
  CostAssignment costs;
  BoundInputs in;
  Trace trace;

  AuditRun() {
    const auto cert = certify_global(sys.A, sys.B, {Mat::Zero(1, 1), Mat::Zero(1, 1)});
    const int H = static_cast<int>(std::ceil(std::log(2 * cert.kappa) / cert.gamma));
    std::vector<std::unique_ptr<GpcAgent>> agents;
    std::vector<Policy*> ptrs;
    for (int i = 0; i < 2; ++i) {
      auto cost = std::make_shared<QuadraticTracking>(TargetSignal::sinusoidal(Vec::Constant(1, 0.5 - i), 0.3, 20, i),
                                                      TargetSignal::constant(Vec::Zero(1)), 0.2);
      costs.per_agent.push_back(cost);
      AgentConfig ac;
      ac.index = i;
      ac.H = H;
      ac.eta = 0.2;
      ac.setting = 2;
      ac.set = DacSet::from_certificate(cert, H, 1, 1);
      ac.cost = cost;
      ac.peer_memory = H;
      agents.push_back(std::make_unique<GpcAgent>(sys, ac));
      ptrs.push_back(agents.back().get());
    }
    DisturbanceSpec spec;
    spec.kind = DisturbanceKind::kClippedGaussian;
    spec.sigma = 0.4;
    spec.seed = 3;
    trace = simulate(sys, ptrs, DisturbanceGenerator(spec, 1, sys.W), costs, 150);
    in.kappa = cert.kappa;
    in.gamma = cert.gamma;
    in.W = sys.W;
    in.sum_B = sys.sum_B_norms();
    in.max_B = sys.max_B_norm();
    in.H = H;
    in.d = 1;
    in.tau = 2 * cert.kappa * cert.kappa;
  }
};

}  // namespace

TEST(BoundAudit, LearningRunStaysWithinEveryBound) {
  const AuditRun r;
  const BoundAudit a = audit_bounds(r.trace, r.sys, r.costs, r.in);
  EXPECT_EQ(a.violations(), 0);
  EXPECT_GT(a.check("transfer").evaluated, 0);
  EXPECT_GT(a.check("gradient").evaluated, 0);
  EXPECT_LE(a.check("state").worst_ratio, 1.0);
}

TEST(BoundAudit, UnderstatedDisturbanceIsCaught) {
  const AuditRun r;
  BoundInputs lie = r.in;
  lie.W = 1e-4;
  EXPECT_GT(audit_bounds(r.trace, r.sys, r.costs, lie).check("state").violations, 0);
}
