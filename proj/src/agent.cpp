#include "magpc/agent.hpp"

#include "magpc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace magpc {

namespace {
int ceil_positive(double v) { return std::max(1, static_cast<int>(std::ceil(v))); }
}  // namespace

GpcAgent::GpcAgent(const LdsSystem& sys, AgentConfig cfg)
    : RecoveringPolicy(sys, cfg.index, cfg.setting),
      cfg_(std::move(cfg)),
      buf_(std::max(cfg_.H, 1) + std::max({cfg_.H, cfg_.peer_memory, 1}) + 1, sys.d()) {
  const int k = sys.k(cfg_.index);
  const int d = sys.d();
  if (cfg_.H < 1) throw ConfigError("memory length H must be >= 1");
  if (!(cfg_.eta >= 0.0) || !std::isfinite(cfg_.eta)) throw ConfigError("step size must be finite and >= 0");
  if (cfg_.K.size() == 0) cfg_.K = Mat::Zero(k, d);
  if (cfg_.K.rows() != k || cfg_.K.cols() != d) throw DimensionError("gain must be k x d", cfg_.index);
  if (cfg_.set.H != cfg_.H || cfg_.set.k != k || cfg_.set.d != d) {
    throw DimensionError("DAC set shape does not match the agent", cfg_.index);
  }
  if (!cfg_.cost) throw ConfigError("agent needs a cost oracle");
  if (cfg_.scope == CostScope::kJoint && cfg_.setting != 2) {
    throw ConfigError("a shared joint-control cost requires information setting 2");
  }
  M_ = cfg_.M_init.empty() ? DacParams::zeros(cfg_.H, k, d) : cfg_.M_init;
  check_shape(M_, cfg_.H, k, d, cfg_.index);
  if (!membership(M_, cfg_.set)) throw ConfigError("initial DAC parameter lies outside the feasible set");
  own_stack_ = TransferStack(sys.A - B_ * cfg_.K, cfg_.H);
}

Vec GpcAgent::act(int t, const Vec& x) {
  Vec u = control(cfg_.K, M_, buf_, x);
  begin_round(t, x, u);
  return u;
}

const TransferStack& GpcAgent::stack_for(const JointSnapshot* joint) {
  if (setting_ == 1) return own_stack_;
  bool stale = !global_stack_ || global_K_.size() != joint->K.size();
  for (std::size_t j = 0; !stale && j < joint->K.size(); ++j) stale = global_K_[j] != joint->K[j];
  if (stale) {
    Mat Acl = A_;
    for (std::size_t j = 0; j < joint->B.size(); ++j) Acl -= joint->B[j] * joint->K[j];
    global_stack_ = TransferStack(std::move(Acl), cfg_.H);
    global_K_ = joint->K;
  }
  return *global_stack_;
}

void GpcAgent::observe(const Observation& obs) {
  if (!acted_) throw ProtocolError("observe called before act (agent " + std::to_string(index_) + ")");
  if (setting_ == 2 && (!obs.aggregate_other || obs.joint == nullptr)) {
    throw ProtocolError("setting 2 agent did not receive the aggregate control (agent " +
                        std::to_string(index_) + ")");
  }
  if (cfg_.eta > 0.0) {
    SurrogateProblem prob;
    prob.stack = &stack_for(obs.joint);
    prob.cost = cfg_.cost.get();
    prob.scope = cfg_.scope;
    prob.t = round_;
    int mem = cfg_.H;
    if (setting_ == 1) {
      prob.channels.push_back({B_, cfg_.K, M_});
      prob.self = 0;
    } else {
      const auto& J = *obs.joint;
      for (std::size_t j = 0; j < J.B.size(); ++j) {
        const bool me = static_cast<int>(j) == index_;
        prob.channels.push_back({J.B[j], J.K[j], me ? M_ : J.M[j]});
        mem = std::max(mem, J.M[j].H());
      }
      prob.self = index_;
    }
    if (cfg_.H + mem + 1 > buf_.capacity()) {
      throw ConfigError("peer memory exceeds the configured disturbance window (agent " +
                        std::to_string(index_) + ")");
    }
    prob.dist = buf_.window(cfg_.H + mem + 1);
    SurrogateEval e = surrogate_loss(prob);
    DacParams stepped = M_;
    stepped -= cfg_.eta * e.grad;
    M_ = project(stepped, cfg_.set);
    last_ = std::move(e);
  }
  buf_.push(recover(obs));
}

double effective_disturbance(const Setting1Constants& c) {
  return c.W + (c.N - 1) * c.U * c.max_B;
}

Tuning tune_setting1(const Setting1Constants& c) {
  if (!(c.G > 0 && c.W > 0 && c.N >= 1 && c.U >= 0 && c.kappa > 0 && c.gamma > 0 && c.T >= 1)) {
    throw ConfigError("tuning constants must be positive");
  }
  Tuning out;
  out.eta = c.c_eta / (c.G * effective_disturbance(c) * std::sqrt(static_cast<double>(c.T)));
  out.H = ceil_positive(std::log(c.kappa * c.T) / c.gamma);
  return out;
}

Tuning tune_setting2(const Setting2Constants& c) {
  if (!(c.N >= 1 && c.kappa > 0 && c.gamma > 0 && c.T >= 1)) {
    throw ConfigError("tuning constants must be positive");
  }
  const double sqrtT = std::sqrt(static_cast<double>(c.T));
  Tuning out;
  out.eta = c.c_eta / (c.N * sqrtT);
  out.H = ceil_positive(std::log(2.0 * c.kappa * c.N * c.N * sqrtT) / c.gamma);
  return out;
}

Tuning tune_setting2_lipschitz(const Setting2Constants& c) {
  if (!(c.N >= 1 && c.kappa > 0 && c.gamma > 0 && c.T >= 1)) {
    throw ConfigError("tuning constants must be positive");
  }
  const double sqrtT = std::sqrt(static_cast<double>(c.T));
  Tuning out;
  out.eta = c.c_eta / sqrtT;
  out.H = ceil_positive(std::log(2.0 * c.kappa * c.N * sqrtT) / c.gamma);
  return out;
}

}  // namespace magpc
