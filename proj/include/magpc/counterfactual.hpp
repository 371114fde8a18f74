#pragma once

#include "magpc/costs.hpp"
#include "magpc/dac.hpp"
#include "magpc/linalg.hpp"

#include <vector>

namespace magpc {

// Closed-loop matrix with cached powers 0..max_power (default 2H+1).
class TransferStack {
 public:
  TransferStack() = default;
  TransferStack(Mat closed_loop, int H, int max_power = -1);

  const Mat& closed_loop() const { return powers_.at(1); }
  int H() const { return H_; }
  int d() const { return static_cast<int>(powers_.front().rows()); }
  int max_power() const { return static_cast<int>(powers_.size()) - 1; }
  const Mat& power(int l) const;

 private:
  int H_ = 0;
  std::vector<Mat> powers_;
};

// An agent's input matrix together with the DAC parameters it used over a
// window: M[k] is the parameter in force k rounds before the window's end.
struct ChannelWindow {
  Mat B;
  std::vector<DacParams> M;
};

// Transfer matrix from w_{t-l} to x_{t+1} when the closed loop is unrolled h
// steps back from round t (M[k] of each channel is the parameter of round t-k).
Mat psi(const TransferStack& stack, const std::vector<ChannelWindow>& channels, int l, int h);

// x_{t+1} = Acl^{h+1} x_{t-h} + sum_{l=0}^{H+h} psi_l w_{t-l}, dist[l] = w_{t-l}.
Vec unroll_state(const TransferStack& stack, const std::vector<ChannelWindow>& channels,
                 const Vec& x_start, const std::vector<Vec>& dist, int h);

// Agent j as seen by the surrogate: input matrix, stabilizing gain and a
// parameter held fixed over the memory window (empty M = pure linear agent).
struct Channel {
  Mat B;
  Mat K;
  DacParams M;
};

// Ideal state: the state reached after H+1 steps from zero with every
// channel playing its fixed parameter. dist[l] = w_{t-1-l}.
Vec ideal_state_transfer(const TransferStack& stack, const std::vector<Channel>& channels,
                         const std::vector<Vec>& dist);
Vec ideal_state_rollout(const TransferStack& stack, const std::vector<Channel>& channels,
                        const std::vector<Vec>& dist);

// Whether the cost sees only the evaluating agent's control or all of them.
enum class CostScope { kOwn, kJoint };

struct SurrogateProblem {
  const TransferStack* stack = nullptr;
  std::vector<Channel> channels;
  int self = 0;
  CostScope scope = CostScope::kOwn;
  const CostOracle* cost = nullptr;
  int t = 0;
  std::vector<Vec> dist;  // w_{t-1-l}, l = 0..2H (zero-padded)
};

struct SurrogateEval {
  Vec y;
  Vec v;  // own ideal action, or the concatenation under joint scope
  double loss = 0.0;
  DacParams grad;  // gradient w.r.t. the evaluating agent's parameter
};

// Loss at the stationary point (every channel's M held fixed); the gradient
// is the analytic chain rule through the affine map M -> (y, v).
SurrogateEval surrogate_loss(const SurrogateProblem& prob, bool with_grad = true);
double surrogate_value(const SurrogateProblem& prob);
// Gradient w.r.t. every channel's parameter (empty for linear channels).
std::vector<DacParams> surrogate_grad_all(const SurrogateProblem& prob);

// Windowed variant: channel j used windows[j].M[k] at round t-k (k = 1..H+1
// for the state, k = 0 for the ideal action).
struct WindowedProblem {
  const TransferStack* stack = nullptr;
  std::vector<ChannelWindow> windows;
  std::vector<Mat> K;
  int self = 0;
  CostScope scope = CostScope::kOwn;
  const CostOracle* cost = nullptr;
  int t = 0;
  std::vector<Vec> dist;  // w_{t-1-l}
};

SurrogateEval windowed_surrogate(const WindowedProblem& prob);

// Finite-difference gradient (test oracle).
DacParams surrogate_grad_fd(const SurrogateProblem& prob, double h = 1e-6);

}  // namespace magpc
