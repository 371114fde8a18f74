#include "magpc/equilibrium.hpp"

#include "magpc/csv.hpp"
#include "magpc/errors.hpp"
#include "magpc/optim.hpp"
#include "magpc/random.hpp"
#include "magpc/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace magpc {

namespace {

Mat closed_loop(const LdsSystem& sys, const std::vector<Mat>& K) {
  if (static_cast<int>(K.size()) != sys.N()) throw DimensionError("need one gain per agent");
  Mat Acl = sys.A;
  for (int j = 0; j < sys.N(); ++j) Acl -= sys.B[static_cast<std::size_t>(j)] * K[static_cast<std::size_t>(j)];
  return Acl;
}

SurrogateProblem make_problem(const JointGame& game, int t, const std::vector<DacParams>& M,
                              const std::vector<Vec>& dist, int self) {
  if (static_cast<int>(M.size()) != game.N()) throw DimensionError("need one parameter per agent");
  SurrogateProblem prob;
  prob.stack = &game.stack;
  prob.cost = game.cost;
  prob.scope = CostScope::kJoint;
  prob.self = self;
  prob.t = t;
  prob.dist = dist;
  for (int j = 0; j < game.N(); ++j) {
    const auto js = static_cast<std::size_t>(j);
    if (M[js].H() != game.H()) throw DimensionError("all agents must share the game's memory", j);
    prob.channels.push_back({game.B[js], game.K[js], M[js]});
  }
  return prob;
}

double params_distance_sq(const std::vector<DacParams>& a, const std::vector<DacParams>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double n = (a[j] - b[j]).frobenius_norm();
    s += n * n;
  }
  return s;
}

Vec stack_flat(const std::vector<DacParams>& M) {
  Eigen::Index n = 0;
  for (const auto& m : M) n += m.size();
  Vec out(n);
  Eigen::Index o = 0;
  for (const auto& m : M) {
    const Vec f = m.flatten();
    out.segment(o, f.size()) = f;
    o += f.size();
  }
  return out;
}

std::vector<DacParams> unstack_flat(const Vec& v, const std::vector<DacParams>& shape) {
  std::vector<DacParams> out;
  Eigen::Index o = 0;
  for (const auto& m : shape) {
    out.push_back(DacParams::unflatten(v.segment(o, m.size()), m.H(), m.k(), m.d()));
    o += m.size();
  }
  return out;
}

}  // namespace

JointGame::JointGame(const LdsSystem& sys, std::vector<Mat> K_in, int H, const CostOracle& c)
    : stack(closed_loop(sys, K_in), H), B(sys.B), K(std::move(K_in)), cost(&c) {
  if (c.control_dim() != sys.total_controls() || c.state_dim() != sys.d()) {
    throw DimensionError("shared cost must act on the state and all controls");
  }
}

std::vector<Vec> past_window(const std::vector<Vec>& w, int t, int n, int d) {
  std::vector<Vec> dist(static_cast<std::size_t>(n), Vec::Zero(d));
  for (int l = 0; l < n; ++l) {
    const int s = t - 1 - l;
    if (s >= 0 && s < static_cast<int>(w.size())) dist[static_cast<std::size_t>(l)] = w[static_cast<std::size_t>(s)];
  }
  return dist;
}

double joint_loss(const JointGame& game, int t, const std::vector<DacParams>& M,
                  const std::vector<Vec>& dist) {
  return surrogate_value(make_problem(game, t, M, dist, 0));
}

std::vector<DacParams> joint_grad(const JointGame& game, int t, const std::vector<DacParams>& M,
                                  const std::vector<Vec>& dist) {
  return surrogate_grad_all(make_problem(game, t, M, dist, 0));
}

BestResponse best_response_gap(const JointGame& game, int t, int i,
                               const std::vector<DacParams>& M, const std::vector<Vec>& dist,
                               const DacSet& set_i, const BestResponseOptions& opts) {
  if (i < 0 || i >= game.N()) throw DimensionError("agent index out of range", i);
  const auto is = static_cast<std::size_t>(i);
  const int H = M[is].H();
  const int k = M[is].k();
  const int d = M[is].d();
  const int n = H * k * d;
  SurrogateProblem prob = make_problem(game, t, M, dist, i);
  auto at = [&](const Vec& m) -> SurrogateProblem& {
    prob.channels[is].M = DacParams::unflatten(m, H, k, d);
    return prob;
  };
  auto value = [&](const Vec& m) { return surrogate_value(at(m)); };
  auto grad = [&](const Vec& m) { return surrogate_loss(at(m)).grad.flatten(); };
  auto proj = [&](const DacParams& P) { return project(P, set_i); };

  BestResponse br;
  const Vec m_now = M[is].flatten();
  br.loss_now = value(m_now);
  if (game.cost->quadratic_model(t)) {
    // The loss is quadratic in M_i: read its Hessian off gradient differences.
    DacQuadratic f;
    f.c = value(Vec::Zero(n));
    f.q = grad(Vec::Zero(n));
    f.Q.resize(n, n);
    for (int j = 0; j < n; ++j) f.Q.col(j) = grad(Vec::Unit(n, j)) - f.q;
    f.Q = 0.5 * (f.Q + f.Q.transpose());
    DacSolverOptions so;
    so.iters = opts.iters;
    so.tol = 1e-3 * opts.eps;
    so.restarts = 2;
    const DacSolve s = minimize_dac_quadratic(f, flat_projector(set_i), H, k, d, {M[is]}, so);
    br.M_best = s.M;
    br.iterations = s.iterations;
    br.grad_mapping = s.grad_mapping;
    br.converged = s.converged;
    br.loss_best = value(s.M.flatten());
  } else {
    ProjectedGradientOptions po;
    po.max_iters = opts.iters;
    po.tol = 1e-3 * opts.eps * (1.0 + grad(m_now).norm());
    auto flat_proj = [&](const Vec& m) { return proj(DacParams::unflatten(m, H, k, d)).flatten(); };
    const auto r = projected_gradient(value, grad, flat_proj, m_now, po);
    br.M_best = DacParams::unflatten(r.x, H, k, d);
    br.iterations = r.iterations;
    br.grad_mapping = r.grad_mapping;
    br.converged = r.converged;
    br.loss_best = r.f;
  }
  br.raw_gap = br.loss_now - br.loss_best;
  if (br.raw_gap < 0.0) {
    br.loss_best = br.loss_now;
    br.M_best = M[is];
  }
  br.gap = std::max(br.raw_gap, 0.0);
  return br;
}

std::vector<std::vector<Vec>> distinct_windows(const std::vector<Vec>& w, int rounds, int n, int d) {
  std::vector<std::vector<Vec>> out;
  for (int t = 0; t < rounds; ++t) {
    auto win = past_window(w, t, n, d);
    const bool seen = std::any_of(out.begin(), out.end(), [&](const std::vector<Vec>& o) {
      for (std::size_t l = 0; l < o.size(); ++l) {
        if (o[l] != win[l]) return false;
      }
      return true;
    });
    if (!seen) out.push_back(std::move(win));
  }
  return out;
}

double estimate_smoothness(const JointGame& game, const std::vector<DacSet>& sets,
                           const std::vector<std::vector<Vec>>& windows,
                           const SmoothnessOptions& opts) {
  if (static_cast<int>(sets.size()) != game.N()) throw DimensionError("need one DAC set per agent");
  double best = 0.0;
  auto ratio = [&](const std::vector<Vec>& dist, const std::vector<DacParams>& a,
                   const std::vector<DacParams>& b) {
    const double dm = std::sqrt(params_distance_sq(a, b));
    if (!(dm > 0.0)) return -1.0;
    const auto ga = joint_grad(game, 0, a, dist);
    const auto gb = joint_grad(game, 0, b, dist);
    return std::sqrt(params_distance_sq(ga, gb)) / dm;
  };
  auto member = [&](std::uint64_t s) {
    std::vector<DacParams> M;
    for (int j = 0; j < game.N(); ++j) {
      M.push_back(random_member(sets[static_cast<std::size_t>(j)], derive_seed(s, static_cast<std::uint64_t>(j))));
    }
    return M;
  };
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto& dist = windows[w];
    for (int s = 0; s < opts.samples; ++s) {
      const auto a = member(derive_seed(opts.seed, w, static_cast<std::uint64_t>(2 * s)));
      const auto b = member(derive_seed(opts.seed, w, static_cast<std::uint64_t>(2 * s + 1)));
      best = std::max(best, ratio(dist, a, b));
    }
    if (opts.power_iters > 0) {
      // Follow grad(a + e) - grad(a) to the direction of largest curvature.
      const auto a = member(derive_seed(opts.seed, w, 0x504f5752ULL));
      Vec base = stack_flat(a);
      Vec dir = stack_flat(member(derive_seed(opts.seed, w, 0x44495230ULL))) - base;
      const double step = 1e-3 * std::max(1.0, base.norm());
      for (int it = 0; it < opts.power_iters; ++it) {
        const double nd = dir.norm();
        if (!(nd > 0.0)) break;
        dir *= step / nd;
        const auto b = unstack_flat(base + dir, a);
        const double r = ratio(dist, a, b);
        best = std::max(best, r);
        dir = stack_flat(joint_grad(game, 0, b, dist)) - stack_flat(joint_grad(game, 0, a, dist));
      }
    }
  }
  return std::max(best * opts.safety, 1e-12);
}

double EqGapReport::average_eqgap_sq(int T_prefix) const {
  double s = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (r.t >= T_prefix) break;
    s += r.eqgap * r.eqgap;
    ++n;
  }
  return n > 0 ? s / n : 0.0;
}

EqGapReport eqgap_ledger(const Trace& trace, const LdsSystem& sys, const JointGame& game,
                         const std::vector<DacSet>& sets, double eta, double L_hat,
                         const EqGapOptions& opts) {
  const int T = trace.T;
  const int N = game.N();
  if (static_cast<int>(trace.M_hist.size()) != T || static_cast<int>(trace.M_final.size()) != N) {
    throw ProtocolError("trace does not carry the parameter history");
  }
  if (static_cast<int>(sets.size()) != N) throw DimensionError("need one DAC set per agent");
  EqGapReport rep;
  rep.T = T;
  rep.eta = eta;
  rep.L_hat = L_hat;
  rep.stride = opts.stride > 0 ? opts.stride : (T <= 2000 ? 1 : (T + 1999) / 2000);
  rep.D = uniform_radius(opts.bounds);
  const CostConstants cc = game.cost->constants(rep.D);
  rep.gradient_bound = gradient_norm_bound(opts.bounds, cc.G, rep.D);
  std::vector<double> c_dev(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const double c = (eta > 0.0 ? diameter(sets[static_cast<std::size_t>(i)]) / eta
                                : std::numeric_limits<double>::infinity()) +
                     rep.gradient_bound;
    c_dev[static_cast<std::size_t>(i)] = c;
    rep.C_M += c * c;
  }
  rep.min_raw_br = std::numeric_limits<double>::infinity();

  const int d = sys.d();
  const int n = game.window();
  double sum_sq = 0.0;
  int evaluated = 0;
  for (int t = 0; t < T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    const auto& Mt = trace.M_hist[ts];
    const auto& Mn = t + 1 < T ? trace.M_hist[ts + 1] : trace.M_final;
    const auto dist = past_window(trace.w, t, n, d);
    const double now = joint_loss(game, t, Mt, dist);
    if (t == 0) rep.initial_gap = now - cc.c_inf.value_or(0.0);
    rep.descent += now - joint_loss(game, t, Mn, dist);
    rep.path_length += params_distance_sq(Mn, Mt);
    for (const auto& g : joint_grad(game, t, Mt, dist)) {
      rep.max_gradient_norm = std::max(rep.max_gradient_norm, g.frobenius_norm());
    }
    if (t + 1 < T) {
      const DeltaCost dc = delta_cost(*game.cost, t, rep.D, derive_seed(opts.seed, 0x44454c54ULL, ts));
      rep.delta_cost_total += dc.value;
      rep.delta_cost_estimated = rep.delta_cost_estimated || dc.estimate;
      rep.dist_variation += (trace.w[ts + 1] - trace.w[ts]).norm();
    }
    if (t % rep.stride != 0) continue;

    EqGapRow row;
    row.t = t;
    for (int i = 0; i < N; ++i) {
      const auto is = static_cast<std::size_t>(i);
      const BestResponse br = best_response_gap(game, t, i, Mt, dist, sets[is], opts.br);
      row.br.push_back(br.gap);
      row.eqgap = std::max(row.eqgap, br.gap);
      rep.min_raw_br = std::min(rep.min_raw_br, br.raw_gap);
      if (!br.converged) ++rep.unconverged;
      const double move = (Mn[is] - Mt[is]).frobenius_norm();
      const double floor = -c_dev[is] * move - opts.br.eps;
      if (-br.raw_gap < floor) ++rep.deviation_violations;
      std::vector<DacParams> probe = Mt;
      for (int s = 0; s < opts.deviation_samples; ++s) {
        probe[is] = random_member(sets[is], derive_seed(opts.seed, ts, static_cast<std::uint64_t>(i * 1024 + s)));
        if (joint_loss(game, t, probe, dist) - now < floor) ++rep.deviation_violations;
      }
    }
    sum_sq += row.eqgap * row.eqgap;
    ++evaluated;
    row.cum_eqgap_sq_avg = sum_sq / evaluated;
    row.delta_cost_cum = rep.delta_cost_total;
    row.dist_variation_cum = rep.dist_variation;
    row.path_length_cum = rep.path_length;
    rep.rows.push_back(std::move(row));
  }
  rep.sum_eqgap_sq = sum_sq;
  if (rep.rows.empty()) rep.min_raw_br = 0.0;
  return rep;
}

bool path_length_check(const EqGapReport& report, double tol) {
  return report.path_length <= 2.0 * report.eta * report.descent + tol;
}

bool gap_sum_check(const EqGapReport& report, double eps) {
  double max_gap = 0.0;
  for (const auto& r : report.rows) max_gap = std::max(max_gap, r.eqgap);
  const double slack = static_cast<double>(report.rows.size()) * (2.0 * eps * max_gap + eps * eps);
  return report.sum_eqgap_sq <= report.C_M * report.path_length + slack;
}

void write_eqgap_csv(const EqGapReport& report, std::ostream& os) {
  os << "t,agent,br,eqgap,cum_eqgap_sq_avg,delta_cost_cum,dist_variation_cum,path_length_cum\n";
  for (const auto& r : report.rows) {
    for (std::size_t i = 0; i < r.br.size(); ++i) {
      CsvRow row;
      row << r.t << static_cast<int>(i) << r.br[i] << r.eqgap << r.cum_eqgap_sq_avg << r.delta_cost_cum
          << r.dist_variation_cum << r.path_length_cum;
      row.write(os);
    }
  }
}

}  // namespace magpc
