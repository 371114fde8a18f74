#include "magpc/counterfactual.hpp"

#include "magpc/errors.hpp"

#include <algorithm>

namespace magpc {

TransferStack::TransferStack(Mat closed_loop, int H, int max_power) : H_(H) {
  if (closed_loop.rows() != closed_loop.cols() || closed_loop.rows() < 1) {
    throw DimensionError("closed-loop matrix must be square");
  }
  if (H < 1) throw ConfigError("memory length H must be >= 1");
  const int top = std::max(max_power < 0 ? 2 * H + 1 : max_power, 1);
  powers_.reserve(static_cast<std::size_t>(top + 1));
  powers_.push_back(Mat::Identity(closed_loop.rows(), closed_loop.cols()));
  powers_.push_back(std::move(closed_loop));
  for (int l = 2; l <= top; ++l) powers_.push_back(powers_[1] * powers_.back());
}

const Mat& TransferStack::power(int l) const {
  if (l < 0 || l > max_power()) throw DimensionError("closed-loop power out of cached range");
  return powers_[static_cast<std::size_t>(l)];
}

Mat psi(const TransferStack& stack, const std::vector<ChannelWindow>& channels, int l, int h) {
  const int H = stack.H();
  if (h < 0 || l < 0 || l > H + h) throw DimensionError("transfer index out of range");
  const int d = stack.d();
  Mat out = l <= h ? stack.power(l) : Mat::Zero(d, d);
  for (int k = 0; k <= h; ++k) {
    Mat inner = Mat::Zero(d, d);
    bool any = false;
    for (const auto& ch : channels) {
      const int p = l - k;
      if (p < 1 || p > H) continue;
      if (static_cast<int>(ch.M.size()) <= k) throw DimensionError("parameter window too short");
      const DacParams& M = ch.M[static_cast<std::size_t>(k)];
      if (p > M.H()) continue;
      inner.noalias() += ch.B * M.blocks[static_cast<std::size_t>(p - 1)];
      any = true;
    }
    if (any) out.noalias() += stack.power(k) * inner;
  }
  return out;
}

Vec unroll_state(const TransferStack& stack, const std::vector<ChannelWindow>& channels,
                 const Vec& x_start, const std::vector<Vec>& dist, int h) {
  const int H = stack.H();
  if (static_cast<int>(dist.size()) < H + h + 1) throw DimensionError("disturbance window too short");
  Vec x = stack.power(h + 1) * x_start;
  for (int l = 0; l <= H + h; ++l) x.noalias() += psi(stack, channels, l, h) * dist[static_cast<std::size_t>(l)];
  return x;
}

namespace {

int max_channel_memory(const std::vector<Channel>& channels) {
  int m = 0;
  for (const auto& ch : channels) m = std::max(m, ch.M.H());
  return m;
}

void check_window(const TransferStack& stack, const std::vector<Channel>& channels,
                  const std::vector<Vec>& dist) {
  const int need = stack.H() + max_channel_memory(channels) + 1;
  if (static_cast<int>(dist.size()) < need) throw DimensionError("disturbance window too short");
}

// Ideal action(s) given y: own v or the concatenation over channels.
Vec ideal_action(const std::vector<Channel>& channels, int self, CostScope scope, const Vec& y,
                 const std::vector<Vec>& dist) {
  auto one = [&](const Channel& ch) {
    Vec v = -ch.K * y;
    for (int p = 1; p <= ch.M.H(); ++p) {
      v.noalias() += ch.M.blocks[static_cast<std::size_t>(p - 1)] * dist[static_cast<std::size_t>(p - 1)];
    }
    return v;
  };
  if (scope == CostScope::kOwn) return one(channels.at(static_cast<std::size_t>(self)));
  std::vector<Vec> parts;
  parts.reserve(channels.size());
  for (const auto& ch : channels) parts.push_back(one(ch));
  return concat(parts);
}

}  // namespace

Vec ideal_state_rollout(const TransferStack& stack, const std::vector<Channel>& channels,
                        const std::vector<Vec>& dist) {
  check_window(stack, channels, dist);
  const int H = stack.H();
  const Mat& Acl = stack.closed_loop();
  Vec z = Vec::Zero(stack.d());
  for (int q = H; q >= 0; --q) {
    Vec next = Acl * z + dist[static_cast<std::size_t>(q)];
    for (const auto& ch : channels) {
      if (ch.M.empty()) continue;
      Vec u = Vec::Zero(ch.B.cols());
      for (int p = 1; p <= ch.M.H(); ++p) {
        u.noalias() += ch.M.blocks[static_cast<std::size_t>(p - 1)] * dist[static_cast<std::size_t>(q + p)];
      }
      next.noalias() += ch.B * u;
    }
    z = std::move(next);
  }
  return z;
}

Vec ideal_state_transfer(const TransferStack& stack, const std::vector<Channel>& channels,
                         const std::vector<Vec>& dist) {
  check_window(stack, channels, dist);
  const int H = stack.H();
  std::vector<ChannelWindow> windows;
  windows.reserve(channels.size());
  for (const auto& ch : channels) {
    if (ch.M.empty()) continue;
    windows.push_back({ch.B, std::vector<DacParams>(static_cast<std::size_t>(H + 1), ch.M)});
  }
  Vec y = Vec::Zero(stack.d());
  for (int l = 0; l <= 2 * H; ++l) y.noalias() += psi(stack, windows, l, H) * dist[static_cast<std::size_t>(l)];
  return y;
}

namespace {

struct CostGrads {
  double value;
  Vec gy;
  std::vector<Vec> gv;  // per channel, empty when that channel is outside the cost
};

CostGrads cost_grads(const SurrogateProblem& prob, const Vec& y, const Vec& v) {
  CostGrads g;
  g.value = prob.cost->value(prob.t, y, v);
  g.gy = prob.cost->grad_x(prob.t, y, v);
  const Vec gu = prob.cost->grad_u(prob.t, y, v);
  g.gv.resize(prob.channels.size());
  if (prob.scope == CostScope::kOwn) {
    g.gv[static_cast<std::size_t>(prob.self)] = gu;
  } else {
    Eigen::Index o = 0;
    for (std::size_t j = 0; j < prob.channels.size(); ++j) {
      const Eigen::Index k = prob.channels[j].K.rows();
      g.gv[j] = gu.segment(o, k);
      o += k;
    }
  }
  return g;
}

void check_problem(const SurrogateProblem& prob) {
  if (prob.stack == nullptr || prob.cost == nullptr) throw ProtocolError("surrogate problem incomplete");
  if (prob.self < 0 || prob.self >= static_cast<int>(prob.channels.size())) {
    throw DimensionError("surrogate self index out of range");
  }
}

// Gradient of the loss w.r.t. each channel's parameter given cost gradients.
std::vector<DacParams> chain_rule(const SurrogateProblem& prob, const CostGrads& g,
                                  bool only_self) {
  const int H = prob.stack->H();
  const Mat& Acl = prob.stack->closed_loop();
  Vec gtilde = g.gy;
  for (std::size_t j = 0; j < prob.channels.size(); ++j) {
    if (g.gv[j].size() == 0) continue;
    gtilde.noalias() -= prob.channels[j].K.transpose() * g.gv[j];
  }
  // lambda_q = (Acl^q)^T gtilde
  std::vector<Vec> lambda(static_cast<std::size_t>(H + 1));
  lambda[0] = gtilde;
  for (int q = 1; q <= H; ++q) lambda[static_cast<std::size_t>(q)] = Acl.transpose() * lambda[static_cast<std::size_t>(q - 1)];

  std::vector<DacParams> out(prob.channels.size());
  for (std::size_t j = 0; j < prob.channels.size(); ++j) {
    if (only_self && static_cast<int>(j) != prob.self) continue;
    const Channel& ch = prob.channels[j];
    if (ch.M.empty()) continue;
    const int Hj = ch.M.H();
    DacParams G = DacParams::zeros(Hj, ch.M.k(), ch.M.d());
    std::vector<Vec> beta(static_cast<std::size_t>(H + 1));
    for (int q = 0; q <= H; ++q) beta[static_cast<std::size_t>(q)] = ch.B.transpose() * lambda[static_cast<std::size_t>(q)];
    for (int p = 1; p <= Hj; ++p) {
      Mat& blk = G.blocks[static_cast<std::size_t>(p - 1)];
      for (int q = 0; q <= H; ++q) {
        blk.noalias() += beta[static_cast<std::size_t>(q)] * prob.dist[static_cast<std::size_t>(q + p)].transpose();
      }
      if (g.gv[j].size() != 0) blk.noalias() += g.gv[j] * prob.dist[static_cast<std::size_t>(p - 1)].transpose();
    }
    out[j] = std::move(G);
  }
  return out;
}

}  // namespace

SurrogateEval surrogate_loss(const SurrogateProblem& prob, bool with_grad) {
  check_problem(prob);
  SurrogateEval e;
  e.y = ideal_state_rollout(*prob.stack, prob.channels, prob.dist);
  e.v = ideal_action(prob.channels, prob.self, prob.scope, e.y, prob.dist);
  if (!with_grad) {
    e.loss = prob.cost->value(prob.t, e.y, e.v);
    return e;
  }
  const CostGrads g = cost_grads(prob, e.y, e.v);
  e.loss = g.value;
  auto grads = chain_rule(prob, g, true);
  e.grad = std::move(grads[static_cast<std::size_t>(prob.self)]);
  return e;
}

double surrogate_value(const SurrogateProblem& prob) { return surrogate_loss(prob, false).loss; }

std::vector<DacParams> surrogate_grad_all(const SurrogateProblem& prob) {
  check_problem(prob);
  const Vec y = ideal_state_rollout(*prob.stack, prob.channels, prob.dist);
  const Vec v = ideal_action(prob.channels, prob.self, prob.scope, y, prob.dist);
  return chain_rule(prob, cost_grads(prob, y, v), false);
}

SurrogateEval windowed_surrogate(const WindowedProblem& prob) {
  if (prob.stack == nullptr || prob.cost == nullptr) throw ProtocolError("surrogate problem incomplete");
  const int H = prob.stack->H();
  const Mat& Acl = prob.stack->closed_loop();
  Vec z = Vec::Zero(prob.stack->d());
  // Step s = t-1-q uses the parameter of round s, i.e. window index q + 1.
  for (int q = H; q >= 0; --q) {
    Vec next = Acl * z + prob.dist.at(static_cast<std::size_t>(q));
    for (const auto& ch : prob.windows) {
      const DacParams& M = ch.M.at(static_cast<std::size_t>(q + 1));
      if (M.empty()) continue;
      Vec u = Vec::Zero(ch.B.cols());
      for (int p = 1; p <= M.H(); ++p) {
        u.noalias() += M.blocks[static_cast<std::size_t>(p - 1)] * prob.dist.at(static_cast<std::size_t>(q + p));
      }
      next.noalias() += ch.B * u;
    }
    z = std::move(next);
  }
  SurrogateEval e;
  e.y = z;
  std::vector<Channel> now;
  now.reserve(prob.windows.size());
  for (std::size_t j = 0; j < prob.windows.size(); ++j) {
    now.push_back({prob.windows[j].B, prob.K.at(j), prob.windows[j].M.at(0)});
  }
  e.v = ideal_action(now, prob.self, prob.scope, e.y, prob.dist);
  e.loss = prob.cost->value(prob.t, e.y, e.v);
  return e;
}

DacParams surrogate_grad_fd(const SurrogateProblem& prob, double h) {
  check_problem(prob);
  SurrogateProblem work = prob;
  DacParams& M = work.channels[static_cast<std::size_t>(prob.self)].M;
  DacParams G = DacParams::zeros(M.H(), M.k(), M.d());
  for (int p = 0; p < M.H(); ++p) {
    for (Eigen::Index idx = 0; idx < M.blocks[static_cast<std::size_t>(p)].size(); ++idx) {
      double& entry = M.blocks[static_cast<std::size_t>(p)].data()[idx];
      const double orig = entry;
      entry = orig + h;
      const double fp = surrogate_value(work);
      entry = orig - h;
      const double fm = surrogate_value(work);
      entry = orig;
      G.blocks[static_cast<std::size_t>(p)].data()[idx] = (fp - fm) / (2.0 * h);
    }
  }
  return G;
}

}  // namespace magpc
