#include "magpc/regret.hpp"

#include "magpc/agent.hpp"
#include "magpc/errors.hpp"
#include "magpc/optim.hpp"
#include "magpc/parallel.hpp"
#include "magpc/random.hpp"
#include "magpc/simd/kernels.hpp"
#include "magpc/stability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace magpc {

double RolloutResult::total(int from) const {
  double s = 0.0;
  for (std::size_t t = static_cast<std::size_t>(std::max(from, 0)); t < cost.size(); ++t) s += cost[t];
  return s;
}

namespace {

std::vector<Vec> comparator_signal(const Trace& trace, const LdsSystem& sys, int i, int setting) {
  std::vector<Vec> sig;
  sig.reserve(static_cast<std::size_t>(trace.T));
  for (int t = 0; t < trace.T; ++t) {
    sig.push_back(setting == 2 ? trace.w[static_cast<std::size_t>(t)] : trace.w_tilde(sys, i, t));
  }
  return sig;
}

double round_cost(const CostAssignment& costs, const Trace& trace, int i, int t, const Vec& x,
                  const Vec& u) {
  if (!costs.joint()) return costs.per_agent.at(static_cast<std::size_t>(i))->value(t, x, u);
  std::vector<Vec> joint = trace.u[static_cast<std::size_t>(t)];
  joint[static_cast<std::size_t>(i)] = u;
  return costs.shared->value(t, x, concat(joint));
}

}  // namespace

RolloutResult counterfactual_rollout(const Trace& trace, const LdsSystem& sys, int i,
                                     const ComparatorPolicy& policy, const CostAssignment& costs,
                                     int setting) {
  if (trace.w.size() != static_cast<std::size_t>(trace.T)) throw ProtocolError("trace is missing disturbances");
  if (i < 0 || i >= sys.N()) throw DimensionError("agent index out of range", i);
  std::vector<Vec> sig;
  if (std::holds_alternative<DacComparator>(policy)) sig = comparator_signal(trace, sys, i, setting);
  RolloutResult res;
  res.x.reserve(static_cast<std::size_t>(trace.T + 1));
  res.cost.reserve(static_cast<std::size_t>(trace.T));
  Vec x = trace.x.front();
  res.x.push_back(x);
  for (int t = 0; t < trace.T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    Vec u;
    if (const auto* lin = std::get_if<LinearComparator>(&policy)) {
      u = -lin->K * x;
    } else if (const auto* dac = std::get_if<DacComparator>(&policy)) {
      u = -dac->K * x;
      for (int p = 1; p <= dac->M.H() && p <= t; ++p) {
        u.noalias() += dac->M.blocks[static_cast<std::size_t>(p - 1)] * sig[static_cast<std::size_t>(t - p)];
      }
    } else {
      u = trace.u[ts][static_cast<std::size_t>(i)];
    }
    res.cost.push_back(round_cost(costs, trace, i, t, x, u));
    std::vector<Vec> controls = trace.u[ts];
    controls[static_cast<std::size_t>(i)] = u;
    x = step(sys, x, controls, trace.w[ts]);
    res.x.push_back(x);
  }
  return res;
}

RegretReport regret(const Trace& trace, int i, const ComparatorResult& comparator) {
  if (comparator.H_start > trace.T) throw ConfigError("burn-in start exceeds the horizon");
  RegretReport r;
  r.agent = i;
  r.comparator = comparator.cls;
  r.H_start = comparator.H_start;
  r.realized_full = trace.total_cost(i, 0);
  r.realized_post = trace.total_cost(i, comparator.H_start);
  r.comparator_full = comparator.cost_full;
  r.comparator_post = comparator.cost_post;
  r.regret_full = r.realized_full - r.comparator_full;
  r.regret_post = r.realized_post - r.comparator_post;
  r.iterations = comparator.iterations;
  r.diagnostic = comparator.diagnostic;
  r.converged = comparator.converged;
  return r;
}

ComparatorResult best_linear(const Trace& trace, const LdsSystem& sys, int i,
                             const CostAssignment& costs, const LinearGrid& grid, double kappa,
                             double gamma, int H_start) {
  const int k = sys.k(i);
  const int d = sys.d();
  const int entries = k * d;
  if (static_cast<int>(grid.lo.size()) != entries || static_cast<int>(grid.hi.size()) != entries) {
    throw ConfigError("linear grid needs one range per gain entry");
  }
  if (grid.points < 1) throw ConfigError("linear grid needs at least one point per entry");
  if (H_start > trace.T) throw ConfigError("burn-in start exceeds the horizon");
  std::vector<int> idx(static_cast<std::size_t>(entries), 0);
  ComparatorResult res;
  res.cls = "linear";
  res.H_start = H_start;
  res.cost_full = std::numeric_limits<double>::infinity();
  res.cost_post = std::numeric_limits<double>::infinity();
  int feasible = 0;
  int total = 0;
  for (;;) {
    Mat K(k, d);
    for (int e = 0; e < entries; ++e) {
      const double lo = grid.lo[static_cast<std::size_t>(e)];
      const double hi = grid.hi[static_cast<std::size_t>(e)];
      const double v = grid.points == 1 ? lo : lo + (hi - lo) * idx[static_cast<std::size_t>(e)] / (grid.points - 1);
      K(e / d, e % d) = v;
    }
    ++total;
    bool ok = false;
    try {
      const auto cert = certify(sys.A, sys.B[static_cast<std::size_t>(i)], K);
      ok = cert.kappa <= kappa + 1e-12 && cert.gamma >= gamma - 1e-12;
    } catch (const Error&) {
      ok = false;
    }
    if (ok) {
      ++feasible;
      const auto roll = counterfactual_rollout(trace, sys, i, LinearComparator{K}, costs, 1);
      const double full = roll.total(0);
      const double post = roll.total(H_start);
      if (full < res.cost_full) {
        res.cost_full = full;
        res.K_full = K;
      }
      if (post < res.cost_post) {
        res.cost_post = post;
        res.K_post = K;
      }
    }
    int e = 0;
    while (e < entries && ++idx[static_cast<std::size_t>(e)] == grid.points) idx[static_cast<std::size_t>(e++)] = 0;
    if (e == entries) break;
  }
  if (feasible == 0) throw ConfigError("no grid point is strongly stable for the requested (kappa, gamma)");
  res.iterations = feasible;
  double resolution = 0.0;
  for (int e = 0; e < entries; ++e) {
    if (grid.points > 1) {
      resolution = std::max(resolution, (grid.hi[static_cast<std::size_t>(e)] - grid.lo[static_cast<std::size_t>(e)]) / (grid.points - 1));
    }
  }
  res.diagnostic = resolution;
  (void)total;
  return res;
}

namespace {

// Per-round affine map m -> z_t = z0_t + Z_t m, z = [x; u_cost].
struct AffineRounds {
  int n = 0;
  int own_offset = 0;
  std::vector<Vec> z0;
  std::vector<Mat> Z;
};

template <typename Visit>
void walk_affine(const Trace& trace, const LdsSystem& sys, int i, int setting,
                 const CostAssignment& costs, const Mat& K, int H, Visit&& visit) {
  const int k = sys.k(i);
  const int d = sys.d();
  const int n = H * k * d;
  const auto sig = comparator_signal(trace, sys, i, setting);
  const Mat& Bi = sys.B[static_cast<std::size_t>(i)];
  const Mat Acl = sys.A - Bi * K;
  int own_offset = 0;
  int m_cost = k;
  if (costs.joint()) {
    m_cost = sys.total_controls();
    for (int j = 0; j < i; ++j) own_offset += sys.k(j);
  }
  Vec x0 = trace.x.front();
  Mat J = Mat::Zero(d, n);
  Vec z0(d + m_cost);
  Mat Z(d + m_cost, n);
  Mat S(k, n);
  for (int t = 0; t < trace.T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    S.setZero();
    for (int p = 1; p <= H && p <= t; ++p) {
      const Vec& s = sig[static_cast<std::size_t>(t - p)];
      const int base = (p - 1) * k * d;
      for (int c = 0; c < d; ++c) {
        for (int r = 0; r < k; ++r) S(r, base + c * k + r) = s(c);
      }
    }
    const Vec u0 = -K * x0;
    const Mat U = -K * J + S;
    z0.head(d) = x0;
    Z.topRows(d) = J;
    if (costs.joint()) {
      z0.tail(m_cost) = concat(trace.u[ts]);
      Z.bottomRows(m_cost).setZero();
    }
    z0.segment(d + own_offset, k) = u0;
    Z.middleRows(d + own_offset, k) = U;
    visit(t, z0, Z);
    x0 = Acl * x0 + trace.w_tilde(sys, i, t);
    J = Acl * J + Bi * S;
  }
}

}  // namespace

std::pair<DacQuadratic, DacQuadratic> assemble_dac_quadratic(
    const Trace& trace, const LdsSystem& sys, int i, int setting, const CostAssignment& costs,
    const Mat& K, int H, int split) {
  const int n = H * sys.k(i) * sys.d();
  DacQuadratic head{Mat::Zero(n, n), Vec::Zero(n), 0.0};
  DacQuadratic tail{Mat::Zero(n, n), Vec::Zero(n), 0.0};
  const CostOracle& oracle = costs.oracle(i);
  walk_affine(trace, sys, i, setting, costs, K, H, [&](int t, const Vec& z0, const Mat& Z) {
    const auto model = oracle.quadratic_model(t);
    if (!model) throw ConfigError("cost oracle has no quadratic model");
    DacQuadratic& acc = t < split ? head : tail;
    const Mat HZ = model->H * Z;
    acc.Q.noalias() += Z.transpose() * HZ;
    acc.q.noalias() += Z.transpose() * (model->H * z0 + model->g);
    acc.c += 0.5 * z0.dot(model->H * z0) + model->g.dot(z0) + model->c0;
  });
  head.Q = 0.5 * (head.Q + head.Q.transpose());
  tail.Q = 0.5 * (tail.Q + tail.Q.transpose());
  return {std::move(head), std::move(tail)};
}

FlatProjector flat_projector(const DacSet& set) {
  return [set](Vec& m) { project_flat(m, set); };
}

FlatProjector flat_projector(const DacProjector& proj, int H, int k, int d) {
  return [proj, H, k, d](Vec& m) { m = proj(DacParams::unflatten(m, H, k, d)).flatten(); };
}

namespace {

struct QuadraticRun {
  Vec x;
  double f = 0.0;
  int iterations = 0;
  double grad_mapping = 0.0;
  bool converged = false;
};

// Accelerated projected gradient specialised to a quadratic: Q x is carried
// along with x so each iteration costs one matrix-vector product.
QuadraticRun quadratic_fista(const DacQuadratic& f, const FlatProjector& proj, Vec x, double L,
                             int max_iters, double tol) {
  proj(x);
  Vec Qx = f.Q * x;
  double fx = 0.5 * x.dot(Qx) + f.q.dot(x) + f.c;
  Vec y = x, Qy = Qx, xn, Qxn;
  double t = 1.0;
  QuadraticRun r;
  for (int it = 0; it < max_iters; ++it) {
    r.iterations = it + 1;
    xn = y - (Qy + f.q) / L;
    proj(xn);
    Qxn.noalias() = f.Q * xn;
    const double fxn = 0.5 * xn.dot(Qxn) + f.q.dot(xn) + f.c;
    r.grad_mapping = L * (xn - y).norm();
    if (r.grad_mapping <= tol) {
      if (fxn <= fx) {
        x.swap(xn);
        fx = fxn;
      }
      r.converged = true;
      break;
    }
    if (fxn > fx) {
      if (t == 1.0) break;  // a plain step failed to descend: rounding floor
      y = x;
      Qy = Qx;
      t = 1.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / tn;
    y = xn + beta * (xn - x);
    Qy = Qxn + beta * (Qxn - Qx);
    t = tn;
    x.swap(xn);
    Qx.swap(Qxn);
    fx = fxn;
  }
  if (!r.converged) {
    Vec step = x - (f.Q * x + f.q) / L;
    proj(step);
    r.grad_mapping = L * (step - x).norm();
    r.converged = r.grad_mapping <= tol;
  }
  r.x = std::move(x);
  r.f = fx;
  return r;
}

}  // namespace

DacSolve minimize_dac_quadratic(const DacQuadratic& f, const FlatProjector& proj, int H, int k,
                                int d, const std::vector<DacParams>& starts,
                                const DacSolverOptions& opts) {
  const int n = H * k * d;
  const double L = power_iteration(f.Q) * 1.02 + 1e-12;
  const double tol = opts.tol * (1.0 + f.q.norm());

  DacSolve best;
  best.cost = std::numeric_limits<double>::infinity();
  auto consider = [&](const QuadraticRun& r) {
    if (r.f < best.cost) {
      best.cost = r.f;
      best.M = DacParams::unflatten(r.x, H, k, d);
      best.grad_mapping = r.grad_mapping;
      best.converged = r.converged;
    }
    best.iterations += r.iterations;
  };

  // Unconstrained minimum-norm minimizer: if feasible it is optimal.
  Eigen::SelfAdjointEigenSolver<Mat> es(f.Q);
  Vec m_free = Vec::Zero(n);
  if (es.info() == Eigen::Success) {
    const Vec& ev = es.eigenvalues();
    const double cutoff = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    const Vec rhs = es.eigenvectors().transpose() * (-f.q);
    Vec coef = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (ev(j) > cutoff) coef(j) = rhs(j) / ev(j);
    }
    m_free = es.eigenvectors() * coef;
    Vec projected = m_free;
    proj(projected);
    if ((projected - m_free).norm() <= 1e-12 * (1.0 + m_free.norm())) {
      Vec step = m_free - (f.Q * m_free + f.q) / L;
      proj(step);
      QuadraticRun r;
      r.x = m_free;
      r.f = f.value(m_free);
      r.grad_mapping = L * (step - m_free).norm();
      r.converged = r.grad_mapping <= tol;
      if (r.converged) {
        consider(r);
        return best;
      }
    }
    proj(m_free);
  }

  std::vector<Vec> inits{m_free};
  for (const auto& s : starts) inits.push_back(s.flatten());
  const std::size_t budget = static_cast<std::size_t>(std::max(opts.restarts, 1));
  for (std::size_t s = 0; s < inits.size() && s < budget; ++s) {
    consider(quadratic_fista(f, proj, inits[s], L, opts.iters, tol));
    if (best.converged) break;
  }
  return best;
}

namespace {

ComparatorResult best_dac_impl(const Trace& trace, const LdsSystem& sys, int i, int setting,
                               const CostAssignment& costs, const DacSet& set,
                               const FlatProjector& proj, int H_start,
                               const DacSolverOptions& opts) {
  if (H_start > trace.T) throw ConfigError("burn-in start exceeds the horizon");
  const int k = sys.k(i);
  const int d = sys.d();
  const int H = set.H;
  const Mat K = trace.K.at(static_cast<std::size_t>(i));
  ComparatorResult res;
  res.cls = "dac";
  res.H_start = H_start;

  std::vector<DacParams> starts;
  starts.push_back(DacParams::zeros(H, k, d));
  if (i < static_cast<int>(trace.M_final.size()) && trace.M_final[static_cast<std::size_t>(i)].H() == H) {
    starts.push_back(trace.M_final[static_cast<std::size_t>(i)]);
  }
  for (int r = 0; static_cast<int>(starts.size()) < opts.restarts; ++r) {
    starts.push_back(random_member(set, derive_seed(opts.seed, 0x52535452ULL, static_cast<std::uint64_t>(r))));
  }

  const bool quadratic = !opts.force_generic && costs.oracle(i).quadratic_model(0).has_value();
  if (quadratic) {
    auto [head, tail] = assemble_dac_quadratic(trace, sys, i, setting, costs, K, H, H_start);
    DacQuadratic full{head.Q + tail.Q, head.q + tail.q, head.c + tail.c};
    const DacSolve a = minimize_dac_quadratic(full, proj, H, k, d, starts, opts);
    std::vector<DacParams> warm = starts;
    warm.insert(warm.begin(), a.M);
    const DacSolve b = H_start > 0 ? minimize_dac_quadratic(tail, proj, H, k, d, warm, opts) : a;
    res.cost_full = a.cost;
    res.M_full = a.M;
    res.cost_post = b.cost;
    res.M_post = b.M;
    res.iterations = a.iterations + (H_start > 0 ? b.iterations : 0);
    res.diagnostic = std::max(a.grad_mapping, b.grad_mapping);
    res.converged = a.converged && b.converged;
    return res;
  }

  // Generic convex cost: chain rule through stored affine maps.
  std::vector<Vec> z0s;
  std::vector<Mat> Zs;
  walk_affine(trace, sys, i, setting, costs, K, H, [&](int, const Vec& z0, const Mat& Z) {
    z0s.push_back(z0);
    Zs.push_back(Z);
  });
  const CostOracle& oracle = costs.oracle(i);
  const int n = H * k * d;
  auto flat_proj = [&](const Vec& m) {
    Vec out = m;
    proj(out);
    return out;
  };
  auto solve_range = [&](int from) {
    auto fun = [&](const Vec& m) {
      double s = 0.0;
      for (int t = from; t < trace.T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const Vec z = z0s[ts] + Zs[ts] * m;
        s += oracle.value(t, z.head(d), z.tail(z.size() - d));
      }
      return s;
    };
    auto grad = [&](const Vec& m) {
      Vec g = Vec::Zero(n);
      for (int t = from; t < trace.T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const Vec z = z0s[ts] + Zs[ts] * m;
        const Vec x = z.head(d);
        const Vec u = z.tail(z.size() - d);
        Vec gz(z.size());
        gz.head(d) = oracle.grad_x(t, x, u);
        gz.tail(z.size() - d) = oracle.grad_u(t, x, u);
        g.noalias() += Zs[ts].transpose() * gz;
      }
      return g;
    };
    ProjectedGradientOptions po;
    po.max_iters = opts.iters;
    po.tol = opts.tol * (1.0 + grad(Vec::Zero(n)).norm());
    ProjectedGradientResult best;
    best.f = std::numeric_limits<double>::infinity();
    int iters = 0;
    for (std::size_t s = 0; s < starts.size(); ++s) {
      auto r = projected_gradient(fun, grad, flat_proj, starts[s].flatten(), po);
      iters += r.iterations;
      if (r.f < best.f) best = r;
      if (best.converged) break;
    }
    best.iterations = iters;
    return best;
  };
  const auto a = solve_range(0);
  const auto b = H_start > 0 ? solve_range(H_start) : a;
  res.cost_full = a.f;
  res.M_full = DacParams::unflatten(a.x, H, k, d);
  res.cost_post = b.f;
  res.M_post = DacParams::unflatten(b.x, H, k, d);
  res.iterations = a.iterations + (H_start > 0 ? b.iterations : 0);
  res.diagnostic = std::max(a.grad_mapping, b.grad_mapping);
  res.converged = a.converged && b.converged;
  return res;
}

}  // namespace

ComparatorResult best_dac(const Trace& trace, const LdsSystem& sys, int i, int setting,
                          const CostAssignment& costs, const DacSet& set, int H_start,
                          const DacSolverOptions& opts) {
  return best_dac_impl(trace, sys, i, setting, costs, set, flat_projector(set), H_start, opts);
}

ComparatorResult best_dac(const Trace& trace, const LdsSystem& sys, int i, int setting,
                          const CostAssignment& costs, const DacSet& set,
                          const DacProjector& proj, int H_start, const DacSolverOptions& opts) {
  return best_dac_impl(trace, sys, i, setting, costs, set,
                       flat_projector(proj, set.H, set.k, set.d), H_start, opts);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope needs matching series of length >= 2");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double lx = std::log(x[j]);
    const double ly = std::log(y[j]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RegretCurve summarize_curve(const std::vector<int>& T_grid,
                            const std::map<int, std::vector<TrialRegret>>& samples) {
  RegretCurve curve;
  for (int T : T_grid) {
    const auto& v = samples.at(T);
    CurvePoint p;
    p.T = T;
    p.trials = static_cast<int>(v.size());
    const double n = static_cast<double>(v.size());
    double s = 0, s2 = 0, sp = 0, sp2 = 0;
    for (const auto& r : v) {
      s += r.full;
      s2 += r.full * r.full;
      const double pos = std::max(r.post, 0.0);
      sp += pos;
      sp2 += pos * pos;
    }
    p.mean = s / n;
    p.mean_post_pos = sp / n;
    if (v.size() > 1) {
      p.stderr_ = std::sqrt(std::max(s2 / n - p.mean * p.mean, 0.0) * n / (n - 1.0) / n);
      p.stderr_post_pos =
          std::sqrt(std::max(sp2 / n - p.mean_post_pos * p.mean_post_pos, 0.0) * n / (n - 1.0) / n);
    }
    curve.points.push_back(p);
  }
  if (curve.points.size() >= 3) {
    std::vector<double> xs, ys, ysp;
    bool pos = true, pos_post = true;
    for (const auto& p : curve.points) {
      xs.push_back(p.T);
      ys.push_back(p.mean);
      ysp.push_back(p.mean_post_pos);
      pos = pos && p.mean > 0.0;
      pos_post = pos_post && p.mean_post_pos > 0.0;
    }
    if (pos) curve.slope = loglog_slope(xs, ys);
    if (pos_post) curve.slope_post = loglog_slope(xs, ysp);
  }
  return curve;
}

RegretCurve regret_curve(const std::vector<int>& T_grid, int trials,
                         const std::function<TrialRegret(int T, int trial)>& cell, int jobs) {
  if (trials < 1) throw ConfigError("need at least one trial");
  const int cells = static_cast<int>(T_grid.size()) * trials;
  std::vector<TrialRegret> out(static_cast<std::size_t>(cells));
  parallel_for(cells, jobs, [&](int c) {
    out[static_cast<std::size_t>(c)] = cell(T_grid[static_cast<std::size_t>(c / trials)], c % trials);
  });
  std::map<int, std::vector<TrialRegret>> samples;
  for (int c = 0; c < cells; ++c) samples[T_grid[static_cast<std::size_t>(c / trials)]].push_back(out[static_cast<std::size_t>(c)]);
  return summarize_curve(T_grid, samples);
}

std::vector<double> lower_bound_phi_linear(const std::vector<int>& bits, double x0,
                                           const std::vector<double>& gains) {
  if (bits.size() < 2) throw ConfigError("need bits for rounds 0..T");
  const std::size_t T = bits.size() - 1;
  std::vector<double> coeff(T);
  for (std::size_t t = 1; t <= T; ++t) coeff[t - 1] = x0 * (bits[t] - 0.5);
  std::vector<double> out(gains.size());
  simd::kernels().geometric_series_grid(gains.data(), gains.size(), 0.5, coeff.data(), T, out.data());
  for (auto& v : out) v += 0.5 * static_cast<double>(T);
  return out;
}

std::vector<double> lower_bound_phi_dac(const std::vector<int>& bits, int H,
                                        const std::vector<double>& values) {
  if (bits.size() < 2) throw ConfigError("need bits for rounds 0..T");
  const std::size_t T = bits.size() - 1;
  double weighted = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    weighted += static_cast<double>(std::min<std::size_t>(t, static_cast<std::size_t>(H))) * (bits[t] - 0.5);
  }
  std::vector<double> out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) out[j] = values[j] * weighted + 0.5 * static_cast<double>(T);
  return out;
}

LowerBoundReport lower_bound_experiment(const LowerBoundOptions& opts) {
  if (opts.trials < 1 || opts.T_grid.empty()) throw ConfigError("lower bound needs trials and a T grid");
  if (opts.grid_points < 2) throw ConfigError("comparator grid needs at least two points");
  LowerBoundReport rep;
  rep.kind = opts.kind;
  const bool linear = opts.kind == LowerBoundKind::kLinear;
  const DacSet dac_set = DacSet::make(opts.H, 1, 1, opts.kappa, opts.gamma);
  std::vector<double> grid(static_cast<std::size_t>(opts.grid_points));
  for (int j = 0; j < opts.grid_points; ++j) {
    const double s = static_cast<double>(j) / (opts.grid_points - 1);
    grid[static_cast<std::size_t>(j)] = linear ? s : dac_set.radius(opts.H) * (2.0 * s - 1.0);
  }

  struct Cell {
    double regret = 0.0;
    double realized = 0.0;
    double comparator = 0.0;
  };
  const int nT = static_cast<int>(opts.T_grid.size());
  std::vector<Cell> cells(static_cast<std::size_t>(nT * opts.trials));
  parallel_for(nT * opts.trials, opts.jobs, [&](int c) {
    const int T = opts.T_grid[static_cast<std::size_t>(c / opts.trials)];
    const int trial = c % opts.trials;
    const std::uint64_t seed = derive_seed(opts.seed, static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(trial));
    Mat A = Mat::Zero(1, 1);
    Mat B = Mat::Constant(1, 1, linear ? 0.5 : 1.0);
    LdsSystem sys(A, {B}, 1.0);
    auto cost = std::make_shared<LowerBoundCost>(1, seed);
    DisturbanceSpec ds;
    ds.kind = DisturbanceKind::kConstant;
    ds.value = Vec::Constant(1, linear ? 0.0 : 1.0);
    DisturbanceGenerator gen(ds, 1, 1.0);

    AgentConfig ac;
    ac.index = 0;
    ac.K = Mat::Zero(1, 1);
    ac.setting = 1;
    ac.cost = cost;
    if (linear) {
      const auto cert = certify(sys.A, B, ac.K);
      ac.H = opts.H;
      ac.set = DacSet::from_certificate(cert, ac.H, 1, 1);
    } else {
      ac.H = opts.H;
      ac.set = dac_set;
    }
    ac.eta = opts.c_eta / std::sqrt(static_cast<double>(T));
    GpcAgent agent(sys, ac);
    CostAssignment ca;
    ca.per_agent.push_back(cost);
    SimulationOptions so;
    so.x0 = Vec::Constant(1, linear ? opts.x0 : 0.0);
    so.record_params = false;
    const Trace tr = simulate(sys, {&agent}, gen, ca, T + 1, so);

    std::vector<int> bits(static_cast<std::size_t>(T + 1));
    for (int t = 0; t <= T; ++t) bits[static_cast<std::size_t>(t)] = cost->bit(t);
    const auto phi = linear ? lower_bound_phi_linear(bits, opts.x0, grid)
                            : lower_bound_phi_dac(bits, opts.H, grid);
    Cell cell;
    cell.realized = tr.total_cost(0, 1);
    cell.comparator = *std::min_element(phi.begin(), phi.end());
    cell.regret = cell.realized - cell.comparator;
    cells[static_cast<std::size_t>(c)] = cell;
  });

  double rmin = std::numeric_limits<double>::infinity();
  double rmax = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < nT; ++r) {
    const int T = opts.T_grid[static_cast<std::size_t>(r)];
    LowerBoundRow row;
    row.T = T;
    std::vector<double> regrets;
    double s = 0, s2 = 0, cost_sum = 0, comp = 0;
    for (int trial = 0; trial < opts.trials; ++trial) {
      const Cell& c = cells[static_cast<std::size_t>(r * opts.trials + trial)];
      regrets.push_back(c.regret);
      s += c.regret;
      s2 += c.regret * c.regret;
      cost_sum += c.realized / T;
      comp += c.comparator;
    }
    const double n = opts.trials;
    row.mean_regret = s / n;
    row.stderr_regret = n > 1 ? std::sqrt(std::max(s2 / n - row.mean_regret * row.mean_regret, 0.0) / (n - 1.0)) : 0.0;
    row.ratio = row.mean_regret / std::sqrt(static_cast<double>(T));
    row.mean_cost_per_round = cost_sum / n;
    row.mean_comparator = comp / n;
    rmin = std::min(rmin, row.ratio);
    rmax = std::max(rmax, row.ratio);
    rep.rows.push_back(row);
    rep.trial_regret.push_back(std::move(regrets));
  }
  rep.ratio_spread = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace magpc
