#pragma once

#include "magpc/costs.hpp"
#include "magpc/counterfactual.hpp"
#include "magpc/dac.hpp"
#include "magpc/policy.hpp"

#include <memory>
#include <optional>

namespace magpc {

struct AgentConfig {
  int index = 0;
  Mat K;
  int H = 1;
  double eta = 0.0;
  int setting = 2;
  DacSet set;
  DacParams M_init;  // zeros when empty
  std::shared_ptr<const CostOracle> cost;
  CostScope scope = CostScope::kOwn;  // kJoint: cost sees [u^1; ...; u^N]
  int peer_memory = 0;  // largest H among other agents (Setting 2 windows)
};

// Online gradient perturbation controller for one agent: plays the DAC
// policy and takes a projected gradient step on the ideal-state loss.
class GpcAgent : public RecoveringPolicy {
 public:
  GpcAgent(const LdsSystem& sys, AgentConfig cfg);

  Vec act(int t, const Vec& x) override;
  void observe(const Observation& obs) override;
  const Mat& gain() const override { return cfg_.K; }
  const DacParams& params() const override { return M_; }
  std::string kind() const override { return "gpc"; }

  const AgentConfig& config() const { return cfg_; }
  const DisturbanceBuffer& buffer() const { return buf_; }
  // Loss and gradient of the most recent update (empty before round 0 ends).
  const std::optional<SurrogateEval>& last_update() const { return last_; }

 private:
  const TransferStack& stack_for(const JointSnapshot* joint);

  AgentConfig cfg_;
  DacParams M_;
  DisturbanceBuffer buf_;
  TransferStack own_stack_;
  std::optional<TransferStack> global_stack_;
  std::vector<Mat> global_K_;
  std::optional<SurrogateEval> last_;
};

// Step size / memory prescriptions (natural logarithms throughout).
struct Tuning {
  int H = 1;
  double eta = 0.0;
};

struct Setting1Constants {
  double G = 1.0;
  double W = 1.0;
  int N = 1;
  double U = 1.0;
  double max_B = 1.0;
  double kappa = 1.0;
  double gamma = 0.5;
  int T = 1;
  double c_eta = 1.0;
};

// Effective disturbance bound seen by an independent learner.
double effective_disturbance(const Setting1Constants& c);
// eta = c / (G W_eff sqrt T), H = ceil(ln(kappa T) / gamma)
Tuning tune_setting1(const Setting1Constants& c);

struct Setting2Constants {
  int N = 1;
  double kappa = 1.0;
  double gamma = 0.5;
  int T = 1;
  double c_eta = 1.0;
};

// eta = c / (N sqrt T), H = ceil(ln(2 kappa N^2 sqrt T) / gamma)
Tuning tune_setting2(const Setting2Constants& c);
// eta = c / sqrt T, H = ceil(ln(2 kappa N sqrt T) / gamma)
Tuning tune_setting2_lipschitz(const Setting2Constants& c);

}  // namespace magpc
