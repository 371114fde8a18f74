#include "magpc/trace.hpp"

#include "magpc/csv.hpp"
#include "magpc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace magpc {

Vec Trace::w_tilde(const LdsSystem& sys, int i, int t) const {
  return w[static_cast<std::size_t>(t)] + aggregate_other(sys, i, u[static_cast<std::size_t>(t)]);
}

double Trace::total_cost(int i, int from) const {
  double s = 0.0;
  for (int t = std::max(from, 0); t < T; ++t) s += cost[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
  return s;
}

double replay_error(const Trace& trace, const LdsSystem& sys) {
  double err = 0.0;
  for (int t = 0; t < trace.T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    const Vec next = step(sys, trace.x[ts], trace.u[ts], trace.w[ts]);
    err = std::max(err, (next - trace.x[ts + 1]).cwiseAbs().maxCoeff());
  }
  return err;
}

double recovery_error(const Trace& trace, const LdsSystem& sys) {
  double err = 0.0;
  for (int t = 0; t < trace.T; ++t) {
    for (int i = 0; i < trace.N; ++i) {
      const Vec truth = trace.settings[static_cast<std::size_t>(i)] == 2 ? trace.w[static_cast<std::size_t>(t)]
                                                                         : trace.w_tilde(sys, i, t);
      err = std::max(err, (trace.w_est[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] - truth)
                              .cwiseAbs()
                              .maxCoeff());
    }
  }
  return err;
}

void write_trace_csv(const Trace& trace, std::ostream& os) {
  const int d = trace.x.empty() ? 0 : static_cast<int>(trace.x.front().size());
  int kmax = 0;
  for (const auto& ui : trace.u.empty() ? std::vector<Vec>{} : trace.u.front()) {
    kmax = std::max(kmax, static_cast<int>(ui.size()));
  }
  CsvRow header;
  header << "t";
  for (int k = 0; k < d; ++k) header << ("x" + std::to_string(k));
  header << "agent";
  for (int k = 0; k < kmax; ++k) header << ("u" + std::to_string(k));
  for (int k = 0; k < d; ++k) header << ("w" + std::to_string(k));
  for (int k = 0; k < d; ++k) header << ("w_est" + std::to_string(k));
  header << "cost";
  header.write(os);
  for (int t = 0; t < trace.T; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    for (int i = 0; i < trace.N; ++i) {
      const auto is = static_cast<std::size_t>(i);
      CsvRow row;
      row << t;
      for (int k = 0; k < d; ++k) row << trace.x[ts](k);
      row << i;
      const Vec& u = trace.u[ts][is];
      for (int k = 0; k < kmax; ++k) {
        if (k < u.size()) {
          row << u(k);
        } else {
          row << "";
        }
      }
      for (int k = 0; k < d; ++k) row << trace.w[ts](k);
      for (int k = 0; k < d; ++k) row << trace.w_est[ts][is](k);
      row << trace.cost[ts][is];
      row.write(os);
    }
  }
}

void write_params_csv(const Trace& trace, std::ostream& os) {
  os << "t,agent,block,row,col,value\n";
  auto dump = [&](int t, int i, const DacParams& M) {
    for (int p = 0; p < M.H(); ++p) {
      const Mat& b = M.blocks[static_cast<std::size_t>(p)];
      for (Eigen::Index c = 0; c < b.cols(); ++c) {
        for (Eigen::Index r = 0; r < b.rows(); ++r) {
          CsvRow row;
          row << t << i << p << static_cast<long>(r) << static_cast<long>(c) << b(r, c);
          row.write(os);
        }
      }
    }
  };
  for (int t = 0; t < static_cast<int>(trace.M_hist.size()); ++t) {
    for (int i = 0; i < trace.N; ++i) dump(t, i, trace.M_hist[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < static_cast<int>(trace.M_final.size()); ++i) dump(trace.T, i, trace.M_final[static_cast<std::size_t>(i)]);
}

Trace simulate(const LdsSystem& sys, const std::vector<Policy*>& agents,
               const DisturbanceGenerator& gen, const CostAssignment& costs, int T,
               const SimulationOptions& opts) {
  sys.validate();
  if (T < 1) throw ConfigError("horizon T must be >= 1");
  const int N = sys.N();
  if (static_cast<int>(agents.size()) != N) throw DimensionError("need exactly one policy per agent");
  if (gen.d() != sys.d()) throw DimensionError("disturbance generator dimension differs from d");
  if (!costs.joint() && static_cast<int>(costs.per_agent.size()) != N) {
    throw ConfigError("need one cost oracle per agent");
  }

  Trace tr;
  tr.T = T;
  tr.N = N;
  tr.x.reserve(static_cast<std::size_t>(T + 1));
  tr.u.reserve(static_cast<std::size_t>(T));
  tr.w.reserve(static_cast<std::size_t>(T));
  tr.w_est.reserve(static_cast<std::size_t>(T));
  tr.cost.reserve(static_cast<std::size_t>(T));
  for (auto* a : agents) {
    tr.settings.push_back(a->setting());
    tr.K.push_back(a->gain());
  }
  Vec x = opts.x0.size() == 0 ? Vec::Zero(sys.d()) : opts.x0;
  if (x.size() != sys.d()) throw DimensionError("initial state has wrong dimension");
  tr.x.push_back(x);

  const bool any_setting2 = std::any_of(agents.begin(), agents.end(),
                                        [](const Policy* a) { return a->setting() == 2; });
  JointSnapshot snap;
  snap.B = sys.B;

  for (int t = 0; t < T; ++t) {
    std::vector<Vec> u(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
      u[static_cast<std::size_t>(i)] = agents[static_cast<std::size_t>(i)]->act(t, x);
      if (u[static_cast<std::size_t>(i)].size() != sys.k(i)) throw DimensionError("policy returned a control of wrong size", i);
    }
    const Vec w = gen.generate(t);
    Vec next = step(sys, x, u, w);
    std::vector<double> c(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) c[static_cast<std::size_t>(i)] = costs.agent_cost(i, t, x, u);

    if (opts.record_params) {
      std::vector<DacParams> Ms;
      Ms.reserve(static_cast<std::size_t>(N));
      for (auto* a : agents) Ms.push_back(a->params());
      tr.M_hist.push_back(std::move(Ms));
    }
    if (any_setting2) {
      snap.K.clear();
      snap.M.clear();
      for (auto* a : agents) {
        snap.K.push_back(a->gain());
        snap.M.push_back(a->params());
      }
    }
    std::vector<Vec> west(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
      Policy* a = agents[static_cast<std::size_t>(i)];
      Observation obs;
      obs.t = t;
      obs.x_next = next;
      if (a->setting() == 2) {
        obs.aggregate_other = aggregate_other(sys, i, u);
        obs.joint = &snap;
      }
      a->observe(obs);
      west[static_cast<std::size_t>(i)] = a->disturbance_estimate();
    }

    tr.u.push_back(std::move(u));
    tr.w.push_back(w);
    tr.w_est.push_back(std::move(west));
    tr.cost.push_back(std::move(c));
    const double n = next.norm();
    if (!std::isfinite(n) || n > opts.guard) {
      throw DivergenceError("state norm exceeded the divergence guard", t + 1);
    }
    x = next;
    tr.x.push_back(std::move(next));
  }
  for (auto* a : agents) tr.M_final.push_back(a->params());
  return tr;
}

}  // namespace magpc
