#pragma once

#include "magpc/costs.hpp"
#include "magpc/dac.hpp"
#include "magpc/lds.hpp"
#include "magpc/trace.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace magpc {

struct LinearComparator {
  Mat K;
};
struct DacComparator {
  Mat K;
  DacParams M;
};
// The agent's own recorded controls.
struct ReplayComparator {};
using ComparatorPolicy = std::variant<LinearComparator, DacComparator, ReplayComparator>;

struct RolloutResult {
  std::vector<Vec> x;        // x^pi_0..x^pi_T
  std::vector<double> cost;  // per round
  double total(int from = 0) const;
};

// Agent i deviates unilaterally to `policy` from round 0; other agents'
// recorded controls and the true disturbances are replayed. DAC comparators
// consume the signal the agent observes in `setting` (w, or w-tilde).
RolloutResult counterfactual_rollout(const Trace& trace, const LdsSystem& sys, int i,
                                     const ComparatorPolicy& policy, const CostAssignment& costs,
                                     int setting);

struct ComparatorResult {
  std::string cls;         // "linear" or "dac"
  int H_start = 0;
  double cost_full = 0.0;  // best comparator over rounds [0, T)
  double cost_post = 0.0;  // best comparator over rounds [H_start, T)
  Mat K_full, K_post;
  DacParams M_full, M_post;
  int iterations = 0;          // solver iterations (dac) or grid size (linear)
  double diagnostic = 0.0;     // final gradient-mapping norm (dac) or grid resolution (linear)
  bool converged = true;
};

struct RegretReport {
  int agent = 0;
  std::string comparator;
  int H_start = 0;
  double realized_full = 0.0;
  double comparator_full = 0.0;
  double regret_full = 0.0;
  double realized_post = 0.0;
  double comparator_post = 0.0;
  double regret_post = 0.0;
  int iterations = 0;
  double diagnostic = 0.0;
  bool converged = true;
};

RegretReport regret(const Trace& trace, int i, const ComparatorResult& comparator);

// Per-entry grid over K (row-major over the k x d entries). Points that are
// not (kappa, gamma)-strongly stable for (A, B_i) are skipped.
struct LinearGrid {
  std::vector<double> lo;
  std::vector<double> hi;
  int points = 101;
};

ComparatorResult best_linear(const Trace& trace, const LdsSystem& sys, int i,
                             const CostAssignment& costs, const LinearGrid& grid, double kappa,
                             double gamma, int H_start);

struct DacSolverOptions {
  int iters = 20000;
  double tol = 1e-8;  // on the gradient mapping, relative to 1 + ||grad at 0||
  int restarts = 5;
  std::uint64_t seed = 0;
  bool force_generic = false;
};

// 0.5 m^T Q m + q^T m + c over the flattened parameter m.
struct DacQuadratic {
  Mat Q;
  Vec q;
  double c = 0.0;
  double value(const Vec& m) const { return 0.5 * m.dot(Q * m) + q.dot(m) + c; }
};

// Counterfactual cost of a fixed DAC comparator as a quadratic in m, split
// into rounds [0, split) and [split, T). Needs a quadratic cost model.
std::pair<DacQuadratic, DacQuadratic> assemble_dac_quadratic(
    const Trace& trace, const LdsSystem& sys, int i, int setting, const CostAssignment& costs,
    const Mat& K, int H, int split);

using DacProjector = std::function<DacParams(const DacParams&)>;
// In-place projection of a flattened parameter.
using FlatProjector = std::function<void(Vec&)>;
FlatProjector flat_projector(const DacSet& set);
FlatProjector flat_projector(const DacProjector& proj, int H, int k, int d);

struct DacSolve {
  DacParams M;
  double cost = 0.0;
  int iterations = 0;
  double grad_mapping = 0.0;
  bool converged = false;
};

// Projected (accelerated, restarted) gradient descent with step 1/L, L from
// power iteration on Q.
DacSolve minimize_dac_quadratic(const DacQuadratic& f, const FlatProjector& proj, int H, int k,
                                int d, const std::vector<DacParams>& starts,
                                const DacSolverOptions& opts);

ComparatorResult best_dac(const Trace& trace, const LdsSystem& sys, int i, int setting,
                          const CostAssignment& costs, const DacSet& set, int H_start,
                          const DacSolverOptions& opts = {});
// Same, over an arbitrary convex feasible set given by its projector.
ComparatorResult best_dac(const Trace& trace, const LdsSystem& sys, int i, int setting,
                          const CostAssignment& costs, const DacSet& set,
                          const DacProjector& proj, int H_start, const DacSolverOptions& opts);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct CurvePoint {
  int T = 0;
  int trials = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double mean_post_pos = 0.0;  // mean of max(regret_post, 0)
  double stderr_post_pos = 0.0;
};

struct RegretCurve {
  std::vector<CurvePoint> points;
  std::optional<double> slope;       // log mean regret vs log T
  std::optional<double> slope_post;  // log mean positive-part post-burn-in regret
};

struct TrialRegret {
  double full = 0.0;
  double post = 0.0;
};

// `cell(T, trial)` runs one scenario instance. Slopes need >= 3 grid points
// with positive means.
RegretCurve regret_curve(const std::vector<int>& T_grid, int trials,
                         const std::function<TrialRegret(int T, int trial)>& cell, int jobs = 1);
RegretCurve summarize_curve(const std::vector<int>& T_grid,
                            const std::map<int, std::vector<TrialRegret>>& samples);

enum class LowerBoundKind { kLinear, kDac };

struct LowerBoundOptions {
  LowerBoundKind kind = LowerBoundKind::kLinear;
  std::vector<int> T_grid{100, 1000, 10000};
  int trials = 200;
  std::uint64_t seed = 1;
  double x0 = 1.0;          // linear kind
  int H = 2;                // dac kind
  double kappa = 1.0;       // comparator class / dac set
  double gamma = 0.5;
  int grid_points = 101;
  double c_eta = 1.0;       // agent step size c / sqrt(T)
  int jobs = 1;
};

struct LowerBoundRow {
  int T = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  double ratio = 0.0;             // mean regret / sqrt(T)
  double mean_cost_per_round = 0.0;
  double mean_comparator = 0.0;
};

struct LowerBoundReport {
  LowerBoundKind kind = LowerBoundKind::kLinear;
  std::vector<LowerBoundRow> rows;
  double ratio_spread = 0.0;  // max ratio / min ratio
  std::vector<std::vector<double>> trial_regret;  // [row][trial]
};

// Comparator value for every gain g of the scalar plant (A = 0, B = 1/2,
// u = g x, x_0) over rounds 1..T: T/2 + sum_t g x_t (b_t - 1/2).
std::vector<double> lower_bound_phi_linear(const std::vector<int>& bits, double x0,
                                           const std::vector<double>& gains);
// Equal-block DAC family on (A = 0, B = 1, w = 1): sum_t min(t,H) M (b_t - 1/2) + 1/2.
std::vector<double> lower_bound_phi_dac(const std::vector<int>& bits, int H,
                                        const std::vector<double>& values);

LowerBoundReport lower_bound_experiment(const LowerBoundOptions& opts);

}  // namespace magpc
