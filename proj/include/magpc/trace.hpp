#pragma once

#include "magpc/costs.hpp"
#include "magpc/dac.hpp"
#include "magpc/disturbance.hpp"
#include "magpc/lds.hpp"
#include "magpc/policy.hpp"

#include <ostream>
#include <vector>

namespace magpc {

// Everything that happened in one run. Indexing is by round t = 0..T-1,
// with x holding x_0..x_T.
struct Trace {
  int T = 0;
  int N = 0;
  std::vector<Vec> x;
  std::vector<std::vector<Vec>> u;
  std::vector<Vec> w;
  std::vector<std::vector<Vec>> w_est;
  std::vector<std::vector<double>> cost;
  std::vector<std::vector<DacParams>> M_hist;  // parameter in force at round t
  std::vector<DacParams> M_final;              // after the last update
  std::vector<int> settings;
  std::vector<Mat> K;

  // w_t + sum_{j != i} B_j u_t^j, the signal a Setting-1 agent sees.
  Vec w_tilde(const LdsSystem& sys, int i, int t) const;
  double total_cost(int i, int from = 0) const;
};

// Max |x_{t+1} - step(x_t, u_t, w_t)| over the trace (0 for an intact trace).
double replay_error(const Trace& trace, const LdsSystem& sys);

// Max deviation of stored estimates from the recovery identities.
double recovery_error(const Trace& trace, const LdsSystem& sys);

// Columns: t, x[0..d-1], agent, u[0..k_i-1], w[0..d-1], w_est[0..d-1], cost.
void write_trace_csv(const Trace& trace, std::ostream& os);
// Columns: t, agent, block, row, col, value.
void write_params_csv(const Trace& trace, std::ostream& os);

struct SimulationOptions {
  Vec x0;                 // zero when empty
  double guard = 1e9;     // divergence threshold on ||x_t||
  bool record_params = true;
};

Trace simulate(const LdsSystem& sys, const std::vector<Policy*>& agents,
               const DisturbanceGenerator& gen, const CostAssignment& costs, int T,
               const SimulationOptions& opts = {});

}  // namespace magpc
