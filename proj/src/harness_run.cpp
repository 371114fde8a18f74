#include "magpc/csv.hpp"
#include "magpc/equilibrium.hpp"
#include "magpc/errors.hpp"
#include "magpc/harness.hpp"
#include "magpc/parallel.hpp"
#include "magpc/random.hpp"
#include "magpc/regret.hpp"
#include "magpc/trace.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

namespace magpc::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Mat to_mat(const std::vector<std::vector<double>>& rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

TargetSignal make_signal(const SignalConfig& s, std::uint64_t seed) {
  if (s.kind == "sinusoidal") return TargetSignal::sinusoidal(to_vec(s.offset), s.amplitude, s.period, seed);
  if (s.kind == "sequence") {
    std::vector<Vec> values;
    for (const auto& v : s.values) values.push_back(to_vec(v));
    return TargetSignal::sequence(std::move(values));
  }
  return TargetSignal::constant(to_vec(s.offset));
}

std::shared_ptr<const CostOracle> make_cost(const CostConfig& cc, int slot, std::uint64_t seed) {
  auto pick = [&](const std::vector<SignalConfig>& v) -> const SignalConfig& {
    return v.size() == 1 ? v.front() : v.at(static_cast<std::size_t>(slot));
  };
  if (cc.family == "linear") {
    return std::make_shared<LinearCost>(to_vec(cc.gx), to_vec(cc.gu), cc.c0);
  }
  const auto a = make_signal(pick(cc.state_targets), derive_seed(seed, 0x53544154ULL, static_cast<std::uint64_t>(slot)));
  const auto b = make_signal(pick(cc.control_targets), derive_seed(seed, 0x4354524cULL, static_cast<std::uint64_t>(slot)));
  return std::make_shared<QuadraticTracking>(a, b, cc.lambda);
}

DisturbanceSpec make_disturbance(const DisturbanceConfig& dc, std::uint64_t seed) {
  DisturbanceSpec s;
  s.kind = disturbance_kind_from_string(dc.kind);
  s.value = to_vec(dc.value);
  s.amplitude = dc.amplitude;
  s.period = dc.period;
  s.sigma = dc.sigma;
  s.clip = dc.clip;
  s.probability = dc.probability;
  for (const auto& v : dc.sequence) s.sequence.push_back(to_vec(v));
  s.seed = seed;
  return s;
}

StabilityCertificate loosen(const StabilityCertificate& cert, const ExperimentConfig& cfg) {
  if (!cfg.kappa && !cfg.gamma) return cert;
  return with_override(cert, cfg.kappa.value_or(cert.kappa), cfg.gamma.value_or(cert.gamma));
}

std::vector<std::unique_ptr<Policy>> make_policies(const Instance& inst) {
  std::vector<std::unique_ptr<Policy>> out;
  for (std::size_t i = 0; i < inst.agents.size(); ++i) {
    const AgentConfig& ac = inst.agents[i];
    if (inst.policy[i] == "linear") {
      out.push_back(std::make_unique<LinearPolicy>(inst.sys, static_cast<int>(i), ac.K, ac.setting));
    } else {
      out.push_back(std::make_unique<GpcAgent>(inst.sys, ac));
    }
  }
  return out;
}

std::vector<Policy*> raw(const std::vector<std::unique_ptr<Policy>>& v) {
  std::vector<Policy*> out;
  for (const auto& p : v) out.push_back(p.get());
  return out;
}

json certificate_json(const StabilityCertificate& c) {
  return json{{"kappa", c.kappa},       {"gamma", c.gamma},         {"spectral_radius", c.spectral_radius},
              {"condition", c.condition}, {"gain_norm", c.gain_norm}, {"residual", c.residual},
              {"overridden", c.overridden}};
}

json instance_json(int T, const Instance& inst) {
  json agents = json::array();
  for (std::size_t i = 0; i < inst.agents.size(); ++i) {
    const AgentConfig& a = inst.agents[i];
    agents.push_back(json{{"policy", inst.policy[i]},
                          {"setting", a.setting},
                          {"H", a.H},
                          {"eta", a.eta},
                          {"kappa", a.set.kappa},
                          {"gamma", a.set.gamma},
                          {"tau", a.set.tau},
                          {"K", json(std::vector<std::vector<double>>())},
                          {"certificate", certificate_json(inst.own[i])}});
    std::vector<std::vector<double>> K;
    for (Eigen::Index r = 0; r < a.K.rows(); ++r) {
      std::vector<double> row;
      for (Eigen::Index c = 0; c < a.K.cols(); ++c) row.push_back(a.K(r, c));
      K.push_back(row);
    }
    agents.back()["K"] = K;
  }
  return json{{"T", T}, {"global_certificate", certificate_json(inst.global)}, {"agents", agents}};
}

class RunDir {
 public:
  RunDir(const std::string& dir, const std::string& command, const ExperimentConfig& cfg)
      : root_(dir), command_(command), cfg_(cfg) {
    fs::create_directories(root_);
    std::ofstream(root_ / "INCOMPLETE") << command << "\n";
  }
  fs::path path(const std::string& name) {
    outputs_.push_back(name);
    const fs::path p = root_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }
  void write(const std::string& name, const std::string& text) {
    std::ofstream out(path(name), std::ios::binary);
    out << text;
    if (!out) throw Error("cannot write output file '" + name + "'");
  }
  void finish(json resolved) {
    std::sort(outputs_.begin(), outputs_.end());
    json m{{"tool", "magpc"},
           {"version", kVersion},
           {"prng", std::string(kPrngTag)},
           {"command", command_},
           {"config", json::parse(to_json_string(cfg_))},
           {"resolved", std::move(resolved)},
           {"outputs", outputs_}};
    std::ofstream(root_ / "manifest.json", std::ios::binary) << m.dump(2) << "\n";
    fs::remove(root_ / "INCOMPLETE");
  }

 private:
  fs::path root_;
  std::string command_;
  const ExperimentConfig& cfg_;
  std::vector<std::string> outputs_;
};

std::string cell_name(const std::string& stem, int T, int trial) {
  return stem + "_T" + std::to_string(T) + "_trial" + std::to_string(trial) + ".csv";
}

std::string brief(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

int report_checks(const std::vector<Check>& checks, bool enabled, std::ostream& log) {
  if (!enabled) return 0;
  bool ok = true;
  for (const auto& c : checks) {
    log << "check " << c.name << ": " << (c.pass ? "pass" : "FAIL") << " (" << c.detail << ")\n";
    ok = ok && c.pass;
  }
  return ok ? 0 : 4;
}

Trace run_cell(const Instance& inst, int T, std::vector<std::unique_ptr<Policy>>& policies) {
  DisturbanceGenerator gen(inst.disturbance, inst.sys.d(), inst.sys.W);
  SimulationOptions so;
  so.x0 = inst.x0;
  return simulate(inst.sys, raw(policies), gen, inst.costs, T, so);
}

}  // namespace

Instance build_instance(const ExperimentConfig& cfg, int T, std::uint64_t cell_seed) {
  validate(cfg);
  Instance inst;
  std::vector<Mat> B;
  for (const auto& b : cfg.B) B.push_back(to_mat(b));
  inst.sys = LdsSystem(to_mat(cfg.A), B, cfg.W);
  const int N = inst.sys.N();
  const int d = inst.sys.d();
  for (int i = 0; i < N; ++i) {
    const AgentSpec& a = cfg.agents[static_cast<std::size_t>(i)];
    if (a.gain == "explicit") {
      inst.K.push_back(to_mat(a.K));
    } else if (a.gain == "synthesize") {
      inst.K.push_back(synthesize(inst.sys.A, B[static_cast<std::size_t>(i)]));
    } else {
      inst.K.push_back(Mat::Zero(inst.sys.k(i), d));
    }
  }
  inst.global = loosen(certify_global(inst.sys.A, B, inst.K), cfg);
  for (int i = 0; i < N; ++i) {
    inst.own.push_back(loosen(certify(inst.sys.A, B[static_cast<std::size_t>(i)], inst.K[static_cast<std::size_t>(i)]), cfg));
  }
  if (cfg.cost.shared) {
    inst.costs.shared = make_cost(cfg.cost, 0, cell_seed);
  } else {
    for (int i = 0; i < N; ++i) inst.costs.per_agent.push_back(make_cost(cfg.cost, i, cell_seed));
  }
  inst.disturbance = make_disturbance(cfg.disturbance, derive_seed(cell_seed, 0x57ULL));
  inst.x0 = cfg.x0.empty() ? Vec::Zero(d) : to_vec(cfg.x0);

  inst.bounds.kappa = inst.global.kappa;
  inst.bounds.gamma = inst.global.gamma;
  inst.bounds.W = cfg.W;
  inst.bounds.sum_B = inst.sys.sum_B_norms();
  inst.bounds.max_B = inst.sys.max_B_norm();
  inst.bounds.d = d;
  inst.bounds.tau = 2.0 * inst.global.kappa * inst.global.kappa;

  std::vector<int> Hs;
  for (int i = 0; i < N; ++i) {
    const AgentSpec& a = cfg.agents[static_cast<std::size_t>(i)];
    const auto& cert = a.setting == 2 ? inst.global : inst.own[static_cast<std::size_t>(i)];
    Tuning tu;
    if (a.tuning == "manual") {
      tu = {a.H, a.eta};
    } else if (a.tuning == "thm31") {
      Setting1Constants c;
      c.W = cfg.W;
      c.N = N;
      c.U = cfg.U;
      c.max_B = inst.sys.max_B_norm();
      c.kappa = cert.kappa;
      c.gamma = cert.gamma;
      c.T = T;
      c.c_eta = a.c_eta;
      c.G = 1.0;
      tu = tune_setting1(c);
      BoundInputs bi = inst.bounds;
      bi.H = tu.H;
      const double D = uniform_radius(bi);
      c.G = inst.costs.oracle(i).constants(D).G;
      tu = tune_setting1(c);
    } else {
      Setting2Constants c{N, cert.kappa, cert.gamma, T, a.c_eta};
      tu = a.tuning == "thm33" ? tune_setting2(c) : tune_setting2_lipschitz(c);
    }
    AgentConfig ac;
    ac.index = i;
    ac.K = inst.K[static_cast<std::size_t>(i)];
    ac.H = tu.H;
    ac.eta = tu.eta;
    ac.setting = a.setting;
    ac.set = DacSet::from_certificate(cert, tu.H, inst.sys.k(i), d);
    ac.cost = cfg.cost.shared ? inst.costs.shared : inst.costs.per_agent[static_cast<std::size_t>(i)];
    ac.scope = cfg.cost.shared ? CostScope::kJoint : CostScope::kOwn;
    inst.agents.push_back(std::move(ac));
    inst.policy.push_back(a.policy);
    Hs.push_back(tu.H);
  }
  for (int i = 0; i < N; ++i) {
    int peer = 0;
    for (int j = 0; j < N; ++j) {
      if (j != i) peer = std::max(peer, Hs[static_cast<std::size_t>(j)]);
    }
    inst.agents[static_cast<std::size_t>(i)].peer_memory = peer;
  }
  inst.bounds.H = *std::max_element(Hs.begin(), Hs.end());
  return inst;
}

int run_simulate(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log) {
  validate(cfg);
  RunDir dir(opts.out_dir, "simulate", cfg);
  const int cells = static_cast<int>(cfg.T_grid.size()) * cfg.trials;
  struct CellOut {
    std::vector<double> totals;
    double replay = 0.0;
    double recovery = 0.0;
    std::string trace_csv, params_csv;
  };
  std::vector<CellOut> outs(static_cast<std::size_t>(cells));
  parallel_for(cells, opts.jobs, [&](int c) {
    const int T = cfg.T_grid[static_cast<std::size_t>(c / cfg.trials)];
    const int trial = c % cfg.trials;
    const Instance inst = build_instance(cfg, T, derive_seed(cfg.seed, static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(trial)));
    auto policies = make_policies(inst);
    const Trace tr = run_cell(inst, T, policies);
    CellOut& o = outs[static_cast<std::size_t>(c)];
    for (int i = 0; i < tr.N; ++i) o.totals.push_back(tr.total_cost(i));
    o.replay = replay_error(tr, inst.sys);
    o.recovery = recovery_error(tr, inst.sys);
    std::ostringstream t1, t2;
    write_trace_csv(tr, t1);
    write_params_csv(tr, t2);
    o.trace_csv = t1.str();
    o.params_csv = t2.str();
  });
  std::ostringstream summary;
  summary << "T,trial,agent,total_cost,replay_error,recovery_error\n";
  double worst_replay = 0.0, worst_recovery = 0.0;
  json resolved = json::array();
  for (int c = 0; c < cells; ++c) {
    const int T = cfg.T_grid[static_cast<std::size_t>(c / cfg.trials)];
    const int trial = c % cfg.trials;
    const CellOut& o = outs[static_cast<std::size_t>(c)];
    dir.write(cell_name("cells/trace", T, trial), o.trace_csv);
    dir.write(cell_name("cells/params", T, trial), o.params_csv);
    for (std::size_t i = 0; i < o.totals.size(); ++i) {
      CsvRow row;
      row << T << trial << static_cast<int>(i) << o.totals[i] << o.replay << o.recovery;
      row.write(summary);
    }
    worst_replay = std::max(worst_replay, o.replay);
    worst_recovery = std::max(worst_recovery, o.recovery);
    if (trial == 0) resolved.push_back(instance_json(T, build_instance(cfg, T, derive_seed(cfg.seed, static_cast<std::uint64_t>(T), 0))));
  }
  dir.write("simulate.csv", summary.str());
  dir.finish(resolved);
  log << "simulated " << cells << " cell(s); max replay error " << brief(worst_replay)
      << ", max recovery error " << brief(worst_recovery) << "\n";
  return report_checks({{"recovery", worst_recovery <= 1e-12, "max error " + brief(worst_recovery)},
                        {"replay", worst_replay <= 1e-12, "max error " + brief(worst_replay)}},
                       opts.check, log);
}

int run_regret(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log) {
  validate(cfg);
  if (!cfg.lower_bound.kind.empty()) return run_lower_bound(cfg, opts, log);
  RunDir dir(opts.out_dir, "regret", cfg);
  const int N = static_cast<int>(cfg.B.size());
  const int cells = static_cast<int>(cfg.T_grid.size()) * cfg.trials;
  struct CellOut {
    std::vector<RegretReport> reports;
    double recovery = 0.0;
    std::string trace_csv;
  };
  std::vector<CellOut> outs(static_cast<std::size_t>(cells));
  parallel_for(cells, opts.jobs, [&](int c) {
    const int T = cfg.T_grid[static_cast<std::size_t>(c / cfg.trials)];
    const int trial = c % cfg.trials;
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(trial));
    const Instance inst = build_instance(cfg, T, seed);
    auto policies = make_policies(inst);
    const Trace tr = run_cell(inst, T, policies);
    CellOut& o = outs[static_cast<std::size_t>(c)];
    o.recovery = recovery_error(tr, inst.sys);
    if (cfg.write_traces) {
      std::ostringstream ts;
      write_trace_csv(tr, ts);
      o.trace_csv = ts.str();
    }
    for (int i = 0; i < N; ++i) {
      const AgentConfig& ac = inst.agents[static_cast<std::size_t>(i)];
      const int H_start = std::min(cfg.regret.burn_in >= 0 ? cfg.regret.burn_in : ac.H, T);
      if (cfg.regret.comparator != "linear") {
        DacSolverOptions so;
        so.iters = cfg.regret.solver_iters;
        so.tol = cfg.regret.solver_tol;
        so.restarts = cfg.regret.solver_restarts;
        so.seed = derive_seed(seed, 0x434d50ULL, static_cast<std::uint64_t>(i));
        const auto res = best_dac(tr, inst.sys, i, ac.setting, inst.costs, ac.set, H_start, so);
        auto rep = regret(tr, i, res);
        o.reports.push_back(rep);
      }
      if (cfg.regret.comparator != "dac") {
        LinearGrid grid{cfg.regret.linear_lo, cfg.regret.linear_hi, cfg.regret.linear_points};
        const auto& cert = ac.setting == 2 ? inst.global : inst.own[static_cast<std::size_t>(i)];
        const auto res = best_linear(tr, inst.sys, i, inst.costs, grid, cert.kappa, cert.gamma, H_start);
        o.reports.push_back(regret(tr, i, res));
      }
    }
  });

  std::ostringstream all;
  all << "T,trial,agent,comparator,H_start,realized_full,comparator_full,regret_full,realized_post,"
         "comparator_post,regret_post,iterations,diagnostic,converged\n";
  double worst_recovery = 0.0;
  int unconverged = 0;
  // series -1 is the per-trial mean over agents (first comparator class).
  std::map<int, std::map<int, std::vector<TrialRegret>>> samples;
  json resolved = json::array();
  for (int c = 0; c < cells; ++c) {
    const int T = cfg.T_grid[static_cast<std::size_t>(c / cfg.trials)];
    const int trial = c % cfg.trials;
    const CellOut& o = outs[static_cast<std::size_t>(c)];
    std::ostringstream cell;
    cell << "T,trial,agent,comparator,H_start,realized_full,comparator_full,regret_full,realized_post,"
            "comparator_post,regret_post,iterations,diagnostic,converged\n";
    TrialRegret mean{0.0, 0.0};
    const std::string first_cls = o.reports.empty() ? "" : o.reports.front().comparator;
    for (const auto& r : o.reports) {
      CsvRow row;
      row << T << trial << r.agent << r.comparator << r.H_start << r.realized_full << r.comparator_full
          << r.regret_full << r.realized_post << r.comparator_post << r.regret_post << r.iterations
          << r.diagnostic << (r.converged ? 1 : 0);
      row.write(cell);
      row.write(all);
      if (!r.converged) ++unconverged;
      if (r.comparator == first_cls) {
        samples[r.agent][T].push_back({r.regret_full, r.regret_post});
        mean.full += r.regret_full / N;
        mean.post += r.regret_post / N;
      }
    }
    samples[-1][T].push_back(mean);
    dir.write(cell_name("cells/regret", T, trial), cell.str());
    if (cfg.write_traces) dir.write(cell_name("cells/trace", T, trial), o.trace_csv);
    worst_recovery = std::max(worst_recovery, o.recovery);
    if (trial == 0) resolved.push_back(instance_json(T, build_instance(cfg, T, derive_seed(cfg.seed, static_cast<std::uint64_t>(T), 0))));
  }
  dir.write("regret.csv", all.str());

  std::ostringstream curve, slopes;
  curve << "series,T,trials,mean,stderr,mean_post_pos,stderr_post_pos\n";
  slopes << "series,slope,slope_post\n";
  std::optional<double> mean_slope, mean_slope_post;
  for (const auto& [series, by_T] : samples) {
    const RegretCurve rc = summarize_curve(cfg.T_grid, by_T);
    const std::string label = series < 0 ? "mean" : "agent" + std::to_string(series);
    for (const auto& p : rc.points) {
      CsvRow row;
      row << label << p.T << p.trials << p.mean << p.stderr_ << p.mean_post_pos << p.stderr_post_pos;
      row.write(curve);
    }
    CsvRow row;
    row << label << (rc.slope ? fmt17(*rc.slope) : std::string("")) << (rc.slope_post ? fmt17(*rc.slope_post) : std::string(""));
    row.write(slopes);
    if (series < 0) {
      mean_slope = rc.slope;
      mean_slope_post = rc.slope_post;
      for (const auto& p : rc.points) {
        log << "T=" << p.T << " mean regret " << brief(p.mean) << " +- " << brief(p.stderr_)
            << "  post-burn-in positive part " << brief(p.mean_post_pos) << "\n";
      }
    }
  }
  dir.write("regret_curve.csv", curve.str());
  dir.write("regret_slopes.csv", slopes.str());
  dir.finish(resolved);

  bool setting1 = false;
  for (const auto& a : cfg.agents) setting1 = setting1 || a.setting == 1;
  const double threshold = setting1 ? cfg.regret.slope_threshold_setting1 : cfg.regret.slope_threshold_setting2;
  auto show = [](const std::optional<double>& v) { return v ? brief(*v) : std::string("undefined"); };
  log << "log-log slope " << show(mean_slope) << ", post-burn-in slope " << show(mean_slope_post)
      << ", unconverged comparator solves " << unconverged << "\n";
  std::vector<Check> checks;
  if (cfg.T_grid.size() >= 3) {
    checks.push_back({"regret-slope", mean_slope && *mean_slope <= threshold,
                      "slope " + show(mean_slope) + " vs " + brief(threshold)});
    checks.push_back({"post-burn-in-slope", mean_slope_post && *mean_slope_post <= threshold,
                      "slope " + show(mean_slope_post) + " vs " + brief(threshold)});
  }
  checks.push_back({"recovery", worst_recovery <= 1e-12, "max error " + brief(worst_recovery)});
  return report_checks(checks, opts.check, log);
}

int run_lower_bound(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log) {
  validate(cfg);
  const LowerBoundConfig& lb = cfg.lower_bound;
  if (lb.kind.empty()) throw ConfigError("config does not describe a lower-bound experiment");
  RunDir dir(opts.out_dir, "lower-bound", cfg);
  LowerBoundOptions lo;
  lo.kind = lb.kind == "linear" ? LowerBoundKind::kLinear : LowerBoundKind::kDac;
  lo.T_grid = cfg.T_grid;
  lo.trials = cfg.trials;
  lo.seed = cfg.seed;
  lo.x0 = lb.x0;
  lo.H = lb.H;
  lo.kappa = lb.kappa;
  lo.gamma = lb.gamma;
  lo.grid_points = lb.grid_points;
  lo.c_eta = lb.c_eta;
  lo.jobs = opts.jobs;
  const LowerBoundReport rep = lower_bound_experiment(lo);

  std::ostringstream table, trials;
  table << "T,mean_regret,stderr_regret,ratio,mean_cost_per_round,mean_comparator\n";
  trials << "T,trial,regret\n";
  bool ratios_in_range = true;
  double worst_cost = 0.0;
  std::string observed;
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    const auto& row = rep.rows[r];
    CsvRow line;
    line << row.T << row.mean_regret << row.stderr_regret << row.ratio << row.mean_cost_per_round << row.mean_comparator;
    line.write(table);
    for (std::size_t k = 0; k < rep.trial_regret[r].size(); ++k) {
      CsvRow t;
      t << row.T << static_cast<int>(k) << rep.trial_regret[r][k];
      t.write(trials);
    }
    observed += (observed.empty() ? "" : ", ") + brief(row.ratio);
    ratios_in_range = ratios_in_range && row.ratio >= lb.ratio_lo && row.ratio <= lb.ratio_hi;
    worst_cost = std::max(worst_cost, std::abs(row.mean_cost_per_round - 0.5));
    log << "T=" << row.T << " mean regret " << brief(row.mean_regret) << " regret/sqrt(T) " << brief(row.ratio)
        << " cost/round " << brief(row.mean_cost_per_round) << "\n";
  }
  dir.write("lower_bound.csv", table.str());
  dir.write("lower_bound_trials.csv", trials.str());
  dir.finish(json{{"kind", lb.kind}});
  std::vector<Check> checks{
      {"ratio-range", ratios_in_range, "regret/sqrt(T) " + observed + " vs [" + brief(lb.ratio_lo) + ", " + brief(lb.ratio_hi) + "]"},
      {"ratio-stability", rep.ratio_spread <= lb.ratio_spread,
       "max/min ratio " + brief(rep.ratio_spread) + " vs " + brief(lb.ratio_spread)}};
  if (lb.kind == "linear") {
    checks.push_back({"cost-per-round", worst_cost <= lb.cost_tolerance,
                      "max |cost/round - 0.5| " + brief(worst_cost) + " vs " + brief(lb.cost_tolerance)});
  }
  return report_checks(checks, opts.check, log);
}

int run_eqgap(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log) {
  validate(cfg);
  if (!cfg.cost.shared) throw ConfigError("eqgap needs a shared (common-interest) cost");
  for (const auto& a : cfg.agents) {
    if (a.policy != "gpc" || a.setting != 2 || a.tuning != "manual") {
      throw ConfigError("eqgap needs setting-2 GPC agents with manual memory H");
    }
    if (a.H != cfg.agents.front().H) throw ConfigError("eqgap needs every agent to use the same H");
  }
  RunDir dir(opts.out_dir, "eqgap", cfg);
  const int cells = static_cast<int>(cfg.T_grid.size()) * cfg.trials;
  struct CellOut {
    EqGapReport rep;
    double recovery = 0.0;
    bool static_game = false;
    std::string csv;
    json resolved;
  };
  std::vector<CellOut> outs(static_cast<std::size_t>(cells));
  parallel_for(cells, opts.jobs, [&](int c) {
    const int T = cfg.T_grid[static_cast<std::size_t>(c / cfg.trials)];
    const int trial = c % cfg.trials;
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(T), static_cast<std::uint64_t>(trial));
    Instance inst = build_instance(cfg, T, seed);
    const int H = inst.agents.front().H;
    const JointGame game(inst.sys, inst.K, H, *inst.costs.shared);
    std::vector<DacSet> sets;
    for (const auto& a : inst.agents) sets.push_back(a.set);

    DisturbanceGenerator gen(inst.disturbance, inst.sys.d(), inst.sys.W);
    const int rounds = std::min(T, 2 * H + 2 + 16);
    std::vector<Vec> w;
    for (int t = 0; t < rounds; ++t) w.push_back(gen.generate(t));
    SmoothnessOptions so;
    so.samples = cfg.eqgap.smoothness_samples;
    so.seed = derive_seed(seed, 0x534d4f4fULL);
    const double L_hat = estimate_smoothness(game, sets, distinct_windows(w, rounds, game.window(), inst.sys.d()), so);
    const double eta = cfg.eqgap.c_eta / L_hat;
    for (auto& a : inst.agents) a.eta = eta;

    auto policies = make_policies(inst);
    const Trace tr = run_cell(inst, T, policies);
    EqGapOptions eo;
    eo.stride = cfg.eqgap.stride;
    eo.br.eps = cfg.eqgap.eps;
    eo.br.iters = cfg.eqgap.iters;
    eo.bounds = inst.bounds;
    eo.seed = derive_seed(seed, 0x4551ULL);
    CellOut& o = outs[static_cast<std::size_t>(c)];
    o.rep = eqgap_ledger(tr, inst.sys, game, sets, eta, L_hat, eo);
    o.recovery = recovery_error(tr, inst.sys);
    o.static_game = gen.is_constant() && inst.costs.shared->time_invariant();
    std::ostringstream csv;
    write_eqgap_csv(o.rep, csv);
    o.csv = csv.str();
    o.resolved = instance_json(T, inst);
    o.resolved["trial"] = trial;
    o.resolved["L_hat"] = L_hat;
    o.resolved["eta"] = eta;
  });

  std::ostringstream summary;
  summary << "T,trial,stride,eta,L_hat,C_M,D,gradient_bound,max_gradient_norm,initial_gap,avg_eqgap_sq,"
             "delta_cost_total,delta_cost_estimated,dist_variation,path_length,descent,path_check,gap_sum_check,"
             "deviation_violations,min_raw_br,unconverged,recovery_error\n";
  std::vector<Check> checks;
  json resolved = json::array();
  double worst_recovery = 0.0;
  bool path_ok = true, sum_ok = true, ledgers_zero = true, any_static = false;
  int violations = 0;
  for (int c = 0; c < cells; ++c) {
    const int T = cfg.T_grid[static_cast<std::size_t>(c / cfg.trials)];
    const int trial = c % cfg.trials;
    const CellOut& o = outs[static_cast<std::size_t>(c)];
    const EqGapReport& r = o.rep;
    const bool pc = path_length_check(r, cfg.eqgap.path_tolerance);
    const bool gc = gap_sum_check(r, cfg.eqgap.eps);
    CsvRow row;
    row << T << trial << r.stride << r.eta << r.L_hat << r.C_M << r.D << r.gradient_bound << r.max_gradient_norm
        << r.initial_gap << r.average_eqgap_sq(T) << r.delta_cost_total << (r.delta_cost_estimated ? 1 : 0)
        << r.dist_variation << r.path_length << r.descent << (pc ? 1 : 0) << (gc ? 1 : 0) << r.deviation_violations
        << r.min_raw_br << r.unconverged << o.recovery;
    row.write(summary);
    dir.write(cell_name("cells/eqgap", T, trial), o.csv);
    resolved.push_back(o.resolved);
    worst_recovery = std::max(worst_recovery, o.recovery);
    path_ok = path_ok && pc;
    sum_ok = sum_ok && gc;
    violations += r.deviation_violations;
    if (o.static_game) {
      any_static = true;
      ledgers_zero = ledgers_zero && r.delta_cost_total == 0.0 && r.dist_variation == 0.0;
    }
    log << "T=" << T << " trial " << trial << ": average EQGAP^2 " << brief(r.average_eqgap_sq(T)) << " (stride "
        << r.stride << "), path length " << brief(r.path_length) << " <= 2 eta descent " << brief(2.0 * r.eta * r.descent)
        << "\n";
  }
  dir.write("eqgap_summary.csv", summary.str());
  dir.finish(resolved);

  if (cfg.T_grid.size() >= 2) {
    const auto [lo_it, hi_it] = std::minmax_element(cfg.T_grid.begin(), cfg.T_grid.end());
    const auto lo_idx = static_cast<int>(lo_it - cfg.T_grid.begin());
    const auto hi_idx = static_cast<int>(hi_it - cfg.T_grid.begin());
    bool decay = true;
    double worst = 0.0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const auto& a = outs[static_cast<std::size_t>(lo_idx * cfg.trials + trial)].rep;
      const auto& b = outs[static_cast<std::size_t>(hi_idx * cfg.trials + trial)].rep;
      const double ra = a.average_eqgap_sq(a.T);
      const double rb = b.average_eqgap_sq(b.T);
      const double ratio = ra > 0.0 ? rb / ra : (rb > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      worst = std::max(worst, ratio);
      decay = decay && ratio <= cfg.eqgap.ratio_threshold;
    }
    checks.push_back({"eqgap-decay", decay, "avg EQGAP^2 ratio " + brief(worst) + " vs " + brief(cfg.eqgap.ratio_threshold)});
  }
  if (any_static) checks.push_back({"static-ledgers-zero", ledgers_zero, "cost change and disturbance variation"});
  checks.push_back({"path-length", path_ok, "tolerance " + brief(cfg.eqgap.path_tolerance)});
  checks.push_back({"gap-sum", sum_ok, "sum EQGAP^2 <= C_M * path length"});
  checks.push_back({"deviation-bound", violations == 0, std::to_string(violations) + " violation(s)"});
  checks.push_back({"recovery", worst_recovery <= 1e-12, "max error " + brief(worst_recovery)});
  return report_checks(checks, opts.check, log);
}

MatrixFile read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file '" + path + "'");
  std::map<std::string, std::vector<std::vector<double>>> blocks;
  std::string current, line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream ss(line.substr(first + 1));
      ss >> current;
      if (current.empty()) throw ConfigError("matrix file line " + std::to_string(lineno) + ": empty block name");
      if (blocks.count(current)) throw ConfigError("matrix file: block '" + current + "' repeated");
      blocks[current];
      continue;
    }
    if (current.empty()) throw ConfigError("matrix file line " + std::to_string(lineno) + ": data before a block header");
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ConfigError("matrix file line " + std::to_string(lineno) + ": not a number '" + cell + "'");
      }
    }
    blocks[current].push_back(std::move(row));
  }
  auto as_mat = [&](const std::string& name) {
    const auto& rows = blocks.at(name);
    if (rows.empty()) throw ConfigError("matrix file: block '" + name + "' is empty");
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw ConfigError("matrix file: block '" + name + "' is ragged");
    }
    return to_mat(rows);
  };
  if (!blocks.count("A")) throw ConfigError("matrix file needs an '# A' block");
  MatrixFile mf;
  mf.A = as_mat("A");
  for (int i = 1; blocks.count("B" + std::to_string(i)); ++i) {
    mf.B.push_back(as_mat("B" + std::to_string(i)));
    const std::string kname = "K" + std::to_string(i);
    mf.K.push_back(blocks.count(kname) ? as_mat(kname) : Mat::Zero(mf.B.back().cols(), mf.A.rows()));
  }
  if (mf.B.empty()) throw ConfigError("matrix file needs at least a '# B1' block");
  for (const auto& [name, rows] : blocks) {
    (void)rows;
    if (name == "A") continue;
    const bool known = (name[0] == 'B' || name[0] == 'K') && name.size() > 1 &&
                       std::all_of(name.begin() + 1, name.end(), [](char ch) { return ch >= '0' && ch <= '9'; }) &&
                       std::stoul(name.substr(1)) >= 1 && std::stoul(name.substr(1)) <= mf.B.size();
    if (!known) throw ConfigError("matrix file: unexpected block '" + name + "'");
  }
  LdsSystem(mf.A, mf.B, 1.0).validate();
  return mf;
}

void print_certificates(const MatrixFile& mf, std::ostream& os) {
  auto show = [&](const std::string& label, const StabilityCertificate& c) {
    os << label << ": kappa=" << fmt17(c.kappa) << " gamma=" << fmt17(c.gamma)
       << " spectral_radius=" << fmt17(c.spectral_radius) << " condition=" << fmt17(c.condition)
       << " gain_norm=" << fmt17(c.gain_norm) << " residual=" << fmt17(c.residual) << "\n";
  };
  for (std::size_t i = 0; i < mf.B.size(); ++i) show("agent" + std::to_string(i + 1), certify(mf.A, mf.B[i], mf.K[i]));
  show("global", certify_global(mf.A, mf.B, mf.K));
}

}  // namespace magpc::harness
