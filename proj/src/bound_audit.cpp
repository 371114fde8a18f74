#include "magpc/bound_audit.hpp"

#include "magpc/counterfactual.hpp"
#include "magpc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace magpc {

long BoundAudit::violations() const {
  long n = 0;
  for (const auto& c : checks) n += c.violations;
  return n;
}

const BoundCheck& BoundAudit::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw ConfigError("unknown bound check " + name);
}

namespace {

class Tally {
 public:
  explicit Tally(double rel_tol) : rel_tol_(rel_tol) {}
  void add(const std::string& name, double measured, double bound) {
    BoundCheck& c = slot(name);
    ++c.evaluated;
    if (measured > bound * (1.0 + rel_tol_) + 1e-12) ++c.violations;
    if (bound > 0.0) c.worst_ratio = std::max(c.worst_ratio, measured / bound);
  }
  BoundAudit finish() {
    BoundAudit out;
    for (const auto& name : order_) out.checks.push_back(map_[name]);
    return out;
  }

 private:
  BoundCheck& slot(const std::string& name) {
    auto it = map_.find(name);
    if (it == map_.end()) {
      order_.push_back(name);
      it = map_.emplace(name, BoundCheck{name}).first;
    }
    return it->second;
  }
  double rel_tol_;
  std::vector<std::string> order_;
  std::map<std::string, BoundCheck> map_;
};

const DacParams& params_at(const Trace& tr, int t, int j) {
  return tr.M_hist[static_cast<std::size_t>(std::max(t, 0))][static_cast<std::size_t>(j)];
}

}  // namespace

BoundAudit audit_bounds(const Trace& tr, const LdsSystem& sys, const CostAssignment& costs,
                        const BoundInputs& in, const BoundAuditOptions& opts) {
  if (tr.M_hist.size() != static_cast<std::size_t>(tr.T)) {
    throw ConfigError("bound audit needs the recorded parameter history");
  }
  const int H = in.H;
  const int N = tr.N;
  for (int j = 0; j < N; ++j) {
    if (params_at(tr, 0, j).H() != H) throw ConfigError("bound audit needs every agent on memory H");
  }
  Mat Acl = sys.A;
  for (int j = 0; j < N; ++j) Acl -= sys.B[static_cast<std::size_t>(j)] * tr.K[static_cast<std::size_t>(j)];
  const TransferStack stack(Acl, H);
  const MagnitudeBounds mb = magnitude_bounds(in);
  const double D = mb.D;
  const CostScope scope = costs.joint() ? CostScope::kJoint : CostScope::kOwn;
  std::vector<double> G(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) G[static_cast<std::size_t>(i)] = costs.oracle(i).constants(D).G;

  Tally tally(opts.rel_tol);
  const int from = opts.from < 0 ? H + 1 : opts.from;
  const int d = sys.d();
  for (int t = from; t < tr.T; ++t) {
    std::vector<Vec> dist(static_cast<std::size_t>(2 * H + 2), Vec::Zero(d));
    for (int l = 0; l <= 2 * H + 1; ++l) {
      if (t - 1 - l >= 0) dist[static_cast<std::size_t>(l)] = tr.w[static_cast<std::size_t>(t - 1 - l)];
    }

    // psi(l, H) as seen from x_t: parameters of rounds t-1, t-2, ...
    std::vector<ChannelWindow> hist;
    for (int j = 0; j < N; ++j) {
      ChannelWindow cw{sys.B[static_cast<std::size_t>(j)], {}};
      for (int k = 0; k <= H; ++k) cw.M.push_back(params_at(tr, t - 1 - k, j));
      hist.push_back(std::move(cw));
    }
    for (int l = 0; l <= 2 * H; ++l) {
      tally.add("transfer", spectral_norm(psi(stack, hist, l, H)), transfer_norm_bound(in, l));
    }

    WindowedProblem wp;
    wp.stack = &stack;
    wp.K = tr.K;
    wp.scope = scope;
    wp.t = t;
    wp.dist = dist;
    for (int j = 0; j < N; ++j) {
      ChannelWindow cw{sys.B[static_cast<std::size_t>(j)], {}};
      for (int k = 0; k <= H + 1; ++k) cw.M.push_back(params_at(tr, t - k, j));
      wp.windows.push_back(std::move(cw));
    }

    const Vec& x = tr.x[static_cast<std::size_t>(t)];
    tally.add("state", x.norm(), mb.state);
    tally.add("state-within-D", x.norm(), D);

    for (int i = 0; i < N; ++i) {
      wp.self = i;
      wp.cost = &costs.oracle(i);
      const SurrogateEval e = windowed_surrogate(wp);
      const Vec& u = tr.u[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      const DacParams& Mi = params_at(tr, t, i);
      Vec v = -tr.K[static_cast<std::size_t>(i)] * e.y;
      for (int p = 1; p <= H; ++p) v.noalias() += Mi.blocks[static_cast<std::size_t>(p - 1)] * dist[static_cast<std::size_t>(p - 1)];

      if (i == 0) {
        tally.add("ideal-state", e.y.norm(), mb.ideal_state);
        tally.add("ideal-state-within-D", e.y.norm(), D);
        tally.add("state-deviation", (x - e.y).norm(), mb.state_deviation);
        tally.add("state-deviation-uniform", (x - e.y).norm(), mb.uniform_deviation);
      }
      tally.add("action", u.norm(), mb.action);
      tally.add("action-within-D", u.norm(), D);
      tally.add("ideal-action", v.norm(), mb.ideal_action);
      tally.add("ideal-action-within-D", v.norm(), D);
      tally.add("action-deviation", (u - v).norm(), mb.action_deviation);
      tally.add("action-deviation-uniform", (u - v).norm(), mb.uniform_deviation);

      const double paid = tr.cost[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      tally.add("surrogate-deviation", std::abs(paid - e.loss),
                surrogate_deviation_bound(in, G[static_cast<std::size_t>(i)], D));

      SurrogateProblem sp;
      sp.stack = &stack;
      sp.cost = &costs.oracle(i);
      sp.scope = scope;
      sp.self = i;
      sp.t = t;
      sp.dist = dist;
      for (int j = 0; j < N; ++j) {
        sp.channels.push_back({sys.B[static_cast<std::size_t>(j)], tr.K[static_cast<std::size_t>(j)], params_at(tr, t, j)});
      }
      const SurrogateEval g = surrogate_loss(sp);
      tally.add("gradient", g.grad.frobenius_norm(),
                gradient_norm_bound(in, G[static_cast<std::size_t>(i)], D));
    }
  }
  return tally.finish();
}

}  // namespace magpc
