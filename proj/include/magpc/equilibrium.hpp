#pragma once

#include "magpc/bounds.hpp"
#include "magpc/costs.hpp"
#include "magpc/counterfactual.hpp"
#include "magpc/dac.hpp"
#include "magpc/lds.hpp"
#include "magpc/trace.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace magpc {

// The common-interest game at one round: every agent is scored by one shared
// cost on [u^1; ...; u^N], and all agents use the same memory H.
struct JointGame {
  TransferStack stack;
  std::vector<Mat> B;
  std::vector<Mat> K;
  const CostOracle* cost = nullptr;

  JointGame(const LdsSystem& sys, std::vector<Mat> K, int H, const CostOracle& cost);
  int N() const { return static_cast<int>(B.size()); }
  int H() const { return stack.H(); }
  // Disturbance window length needed by the loss (dist[l] = w_{t-1-l}).
  int window() const { return 2 * H() + 1; }
};

// dist[l] = w[t-1-l], zero before round 0.
std::vector<Vec> past_window(const std::vector<Vec>& w, int t, int n, int d);

double joint_loss(const JointGame& game, int t, const std::vector<DacParams>& M,
                  const std::vector<Vec>& dist);
std::vector<DacParams> joint_grad(const JointGame& game, int t, const std::vector<DacParams>& M,
                                  const std::vector<Vec>& dist);

struct BestResponseOptions {
  double eps = 1e-7;
  int iters = 10000;
};

struct BestResponse {
  double gap = 0.0;      // clipped at zero when within eps of it
  double raw_gap = 0.0;  // loss(M_t) - best loss as computed
  double loss_now = 0.0;
  double loss_best = 0.0;
  DacParams M_best;
  int iterations = 0;
  double grad_mapping = 0.0;
  bool converged = false;
};

// loss(M_t) - min over M_i in set_i of loss(M_i, M_{-i,t}).
BestResponse best_response_gap(const JointGame& game, int t, int i,
                               const std::vector<DacParams>& M, const std::vector<Vec>& dist,
                               const DacSet& set_i, const BestResponseOptions& opts = {});

struct SmoothnessOptions {
  int samples = 64;      // random feasible pairs per window
  int power_iters = 30;  // refinement steps along the worst direction
  double safety = 1.5;
  std::uint64_t seed = 0;
};

// Max observed ||grad(M) - grad(M')|| / ||M - M'|| over the given windows,
// times the safety factor, floored at 1e-12.
double estimate_smoothness(const JointGame& game, const std::vector<DacSet>& sets,
                           const std::vector<std::vector<Vec>>& windows,
                           const SmoothnessOptions& opts = {});

// Windows seen in rounds 0..rounds-1 of a disturbance sequence, deduplicated.
std::vector<std::vector<Vec>> distinct_windows(const std::vector<Vec>& w, int rounds, int n, int d);

struct EqGapRow {
  int t = 0;
  std::vector<double> br;
  double eqgap = 0.0;
  double cum_eqgap_sq_avg = 0.0;
  double delta_cost_cum = 0.0;
  double dist_variation_cum = 0.0;
  double path_length_cum = 0.0;
};

struct EqGapOptions {
  int stride = 0;  // 0 selects 1 for T <= 2000, else ceil(T / 2000)
  BestResponseOptions br;
  BoundInputs bounds;  // for the uniform radius and the gradient bound
  int deviation_samples = 4;
  std::uint64_t seed = 0;
};

struct EqGapReport {
  int T = 0;
  int stride = 1;
  double eta = 0.0;
  double L_hat = 0.0;
  double D = 0.0;
  double gradient_bound = 0.0;
  double C_M = 0.0;
  std::vector<EqGapRow> rows;  // evaluated rounds only
  double initial_gap = 0.0;    // loss at round 1 minus the cost's lower bound
  double delta_cost_total = 0.0;
  bool delta_cost_estimated = false;
  double dist_variation = 0.0;
  double path_length = 0.0;
  double descent = 0.0;  // sum_t loss_t(M_t) - loss_t(M_{t+1})
  double sum_eqgap_sq = 0.0;
  double min_raw_br = 0.0;
  double max_gradient_norm = 0.0;
  int deviation_violations = 0;
  int unconverged = 0;

  // Average EQGAP^2 over evaluated rounds t < T_prefix.
  double average_eqgap_sq(int T_prefix) const;
};

// Post-hoc ledger of a recorded all-GPC common-interest run.
EqGapReport eqgap_ledger(const Trace& trace, const LdsSystem& sys, const JointGame& game,
                         const std::vector<DacSet>& sets, double eta, double L_hat,
                         const EqGapOptions& opts);

// sum ||M_{t+1} - M_t||^2 <= 2 eta * descent + tol
bool path_length_check(const EqGapReport& report, double tol = 1e-8);
// sum EQGAP^2 <= C_M * path length, with slack for the inner solver tolerance.
bool gap_sum_check(const EqGapReport& report, double eps);

// Columns: t, agent, br, eqgap, cum_eqgap_sq_avg, delta_cost_cum,
// dist_variation_cum, path_length_cum.
void write_eqgap_csv(const EqGapReport& report, std::ostream& os);

}  // namespace magpc
