#include "magpc/policy.hpp"

#include "magpc/errors.hpp"

#include <algorithm>

namespace magpc {

const DacParams& Policy::params() const {
  static const DacParams empty;
  return empty;
}

RecoveringPolicy::RecoveringPolicy(const LdsSystem& sys, int index, int setting)
    : d_(sys.d()), index_(index), setting_(setting) {
  if (index < 0 || index >= sys.N()) throw DimensionError("agent index out of range", index);
  if (setting != 1 && setting != 2) throw ConfigError("information setting must be 1 or 2");
  A_ = sys.A;
  B_ = sys.B[static_cast<std::size_t>(index)];
  w_est_ = Vec::Zero(d_);
}

void RecoveringPolicy::begin_round(int t, const Vec& x, const Vec& u) {
  if (acted_) throw ProtocolError("act called twice without observe (agent " + std::to_string(index_) + ")");
  if (x.size() != d_) throw DimensionError("state has wrong dimension", index_);
  acted_ = true;
  round_ = t;
  x_prev_ = x;
  u_prev_ = u;
}

Vec RecoveringPolicy::recover(const Observation& obs) {
  if (!acted_) throw ProtocolError("observe called before act (agent " + std::to_string(index_) + ")");
  if (obs.x_next.size() != d_) throw DimensionError("next state has wrong dimension", index_);
  Vec w = obs.x_next - A_ * x_prev_ - B_ * u_prev_;
  if (setting_ == 2) {
    if (!obs.aggregate_other) {
      throw ProtocolError("setting 2 recovery needs the aggregate of other controls (agent " +
                          std::to_string(index_) + ")");
    }
    w -= *obs.aggregate_other;
  }
  acted_ = false;
  w_est_ = w;
  return w;
}

LinearPolicy::LinearPolicy(const LdsSystem& sys, int index, Mat K, int setting)
    : RecoveringPolicy(sys, index, setting), K_(std::move(K)) {
  if (K_.rows() != B_.cols() || K_.cols() != d_) throw DimensionError("gain must be k x d", index);
}

Vec LinearPolicy::act(int t, const Vec& x) {
  Vec u = -K_ * x;
  begin_round(t, x, u);
  return u;
}

void LinearPolicy::observe(const Observation& obs) { recover(obs); }

OpenLoopPolicy::OpenLoopPolicy(const LdsSystem& sys, int index, std::vector<Vec> controls,
                               int setting)
    : RecoveringPolicy(sys, index, setting), controls_(std::move(controls)) {
  if (controls_.empty()) throw ConfigError("open-loop control sequence is empty");
  for (const auto& u : controls_) {
    if (u.size() != B_.cols()) throw DimensionError("open-loop control has wrong dimension", index);
  }
  K_ = Mat::Zero(B_.cols(), d_);
}

Vec OpenLoopPolicy::act(int t, const Vec& x) {
  const std::size_t idx = std::min(static_cast<std::size_t>(t), controls_.size() - 1);
  Vec u = controls_[idx];
  begin_round(t, x, u);
  return u;
}

void OpenLoopPolicy::observe(const Observation& obs) { recover(obs); }

}  // namespace magpc
