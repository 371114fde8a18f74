#include "magpc/errors.hpp"
#include "magpc/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace magpc::harness {

using nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SignalConfig, kind, offset, amplitude, period, values)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(CostConfig, family, shared, lambda, state_targets,
                                                control_targets, gx, gu, c0)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AgentSpec, policy, setting, tuning, H, eta, c_eta, gain, K)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DisturbanceConfig, kind, value, amplitude, period, sigma,
                                                clip, probability, sequence)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RegretConfig, comparator, burn_in, solver_iters, solver_tol,
                                                solver_restarts, linear_lo, linear_hi, linear_points,
                                                slope_threshold_setting1, slope_threshold_setting2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LowerBoundConfig, kind, H, kappa, gamma, grid_points, c_eta,
                                                x0, ratio_lo, ratio_hi, ratio_spread, cost_tolerance)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EqGapConfig, stride, eps, iters, smoothness_samples, c_eta,
                                                ratio_threshold, path_tolerance)

void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"name", c.name},
           {"A", c.A},
           {"B", c.B},
           {"W", c.W},
           {"x0", c.x0},
           {"kappa", c.kappa ? json(*c.kappa) : json(nullptr)},
           {"gamma", c.gamma ? json(*c.gamma) : json(nullptr)},
           {"U", c.U},
           {"disturbance", c.disturbance},
           {"cost", c.cost},
           {"agents", c.agents},
           {"T_grid", c.T_grid},
           {"trials", c.trials},
           {"seed", c.seed},
           {"write_traces", c.write_traces},
           {"regret", c.regret},
           {"lower_bound", c.lower_bound},
           {"eqgap", c.eqgap}};
}

void from_json(const json& j, ExperimentConfig& c) {
  const ExperimentConfig d;
  c.name = j.value("name", d.name);
  c.A = j.value("A", d.A);
  c.B = j.value("B", d.B);
  c.W = j.value("W", d.W);
  c.x0 = j.value("x0", d.x0);
  c.kappa = j.contains("kappa") && !j.at("kappa").is_null() ? std::optional<double>(j.at("kappa").get<double>()) : std::nullopt;
  c.gamma = j.contains("gamma") && !j.at("gamma").is_null() ? std::optional<double>(j.at("gamma").get<double>()) : std::nullopt;
  c.U = j.value("U", d.U);
  c.disturbance = j.value("disturbance", d.disturbance);
  c.cost = j.value("cost", d.cost);
  c.agents = j.value("agents", d.agents);
  c.T_grid = j.value("T_grid", d.T_grid);
  c.trials = j.value("trials", d.trials);
  c.seed = j.value("seed", d.seed);
  c.write_traces = j.value("write_traces", d.write_traces);
  c.regret = j.value("regret", d.regret);
  c.lower_bound = j.value("lower_bound", d.lower_bound);
  c.eqgap = j.value("eqgap", d.eqgap);
}

namespace {

// Rejects keys the schema does not know (catches typos in hand-written files).
void check_keys(const json& given, const json& schema, const std::string& where) {
  if (!given.is_object()) return;
  for (auto it = given.begin(); it != given.end(); ++it) {
    if (!schema.contains(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
    const json& sub = schema.at(it.key());
    if (sub.is_object()) check_keys(it.value(), sub, where + it.key() + ".");
    if (it.value().is_array() && sub.is_array() && !sub.empty() && sub.front().is_object()) {
      for (const auto& e : it.value()) check_keys(e, sub.front(), where + it.key() + "[].");
    }
  }
}

json schema() {
  ExperimentConfig c;
  c.agents = {AgentSpec{}};
  c.cost.state_targets = {SignalConfig{}};
  c.cost.control_targets = {SignalConfig{}};
  json j = c;
  j["kappa"] = 0.0;
  j["gamma"] = 0.0;
  return j;
}

std::vector<std::vector<double>> column(std::initializer_list<double> v) {
  std::vector<std::vector<double>> m;
  for (double x : v) m.push_back({x});
  return m;
}

SignalConfig constant_signal(std::vector<double> v) {
  SignalConfig s;
  s.kind = "constant";
  s.offset = std::move(v);
  return s;
}

SignalConfig sinusoid(std::vector<double> offset, double amplitude, double period) {
  SignalConfig s;
  s.kind = "sinusoidal";
  s.offset = std::move(offset);
  s.amplitude = amplitude;
  s.period = period;
  return s;
}

ExperimentConfig lower_bound_preset(const std::string& kind) {
  ExperimentConfig c;
  c.name = "lower-bound-" + kind;
  const double b = kind == "linear" ? 0.5 : 1.0;
  c.A = {{0.0}};
  c.B = {{{b}}};
  c.W = 1.0;
  c.x0 = {kind == "linear" ? 1.0 : 0.0};
  c.disturbance.kind = "constant";
  c.disturbance.value = {kind == "linear" ? 0.0 : 1.0};
  AgentSpec a;
  a.setting = 1;
  a.tuning = "manual";
  a.H = 2;
  c.agents = {a};
  c.T_grid = {100, 1000, 10000};
  c.trials = 200;
  c.seed = 20240501;
  c.cost.family = "lower-bound";
  c.lower_bound.kind = kind;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"lower-bound-linear", "lower-bound-dac", "scalar-duopoly", "formation-toy", "grid-toy"};
}

ExperimentConfig preset(const std::string& name) {
  if (name == "lower-bound-linear") return lower_bound_preset("linear");
  if (name == "lower-bound-dac") return lower_bound_preset("dac");
  if (name == "formation-toy") {
    ExperimentConfig c;
    c.name = name;
    c.A = {{0.4, 0.15}, {-0.1, 0.35}};
    c.B = {column({1.0, 0.0}), column({0.0, 1.0}), column({0.5, 0.5})};
    c.W = 0.5;
    c.x0 = {0.0, 0.0};
    c.disturbance.kind = "sinusoidal";
    c.disturbance.amplitude = 0.5;
    c.disturbance.period = 24.0;
    c.cost.family = "quadratic-tracking";
    c.cost.lambda = 0.1;
    c.cost.state_targets = {sinusoid({1.0, 0.0}, 0.4, 60.0), sinusoid({0.0, 1.0}, 0.4, 45.0),
                            sinusoid({-0.5, 0.5}, 0.4, 80.0)};
    c.cost.control_targets = {constant_signal({0.0})};
    AgentSpec a;
    a.setting = 2;
    a.tuning = "thm33";
    a.c_eta = 0.3;
    c.agents = {a, a, a};
    c.U = 1.0;
    c.T_grid = {256, 512, 1024, 2048, 4096, 8192, 16384};
    c.trials = 20;
    c.seed = 7;
    return c;
  }
  if (name == "scalar-duopoly") {
    ExperimentConfig c;
    c.name = name;
    c.A = {{0.5}};
    c.B = {{{1.0}}, {{1.0}}};
    c.W = 0.5;
    c.x0 = {0.0};
    c.disturbance.kind = "constant";
    c.disturbance.value = {0.5};
    c.cost.family = "quadratic-tracking";
    c.cost.shared = true;
    c.cost.lambda = 0.1;
    c.cost.state_targets = {constant_signal({1.0})};
    c.cost.control_targets = {constant_signal({0.0, 0.0})};
    AgentSpec a;
    a.setting = 2;
    a.tuning = "manual";
    a.H = 3;
    c.agents = {a, a};
    c.T_grid = {1024, 4096};
    c.trials = 1;
    c.seed = 11;
    return c;
  }
  if (name == "grid-toy") {
    ExperimentConfig c;
    c.name = name;
    c.A = {{0.6, 0.2, 0.0, 0.0}, {0.0, 0.6, 0.2, 0.0}, {0.0, 0.0, 0.6, 0.2}, {0.1, 0.0, 0.0, 0.6}};
    c.B = {column({1.0, 0.0, 0.0, 0.0}), column({0.0, 0.0, 1.0, 0.0})};
    c.W = 0.3;
    c.x0 = {0.0, 0.0, 0.0, 0.0};
    c.disturbance.kind = "clipped-gaussian";
    c.disturbance.sigma = 0.15;
    c.cost.family = "quadratic-tracking";
    c.cost.lambda = 0.5;
    c.cost.state_targets = {constant_signal({0.5, 0.0, -0.5, 0.0})};
    c.cost.control_targets = {constant_signal({0.0})};
    AgentSpec a;
    a.setting = 2;
    a.tuning = "thm33";
    c.agents = {a, a};
    c.T_grid = {2000};
    c.trials = 1;
    c.seed = 3;
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::string to_json_string(const ExperimentConfig& cfg) { return json(cfg).dump(2); }

ExperimentConfig from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("tool")) j = j.at("config");
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j, schema(), "");
  ExperimentConfig c;
  try {
    c = j.get<ExperimentConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a malformed field: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

namespace {

bool rectangular(const std::vector<std::vector<double>>& m, std::size_t rows, std::size_t cols) {
  if (m.size() != rows) return false;
  for (const auto& r : m) {
    if (r.size() != cols) return false;
    for (double v : r) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void check_signal(const SignalConfig& s, std::size_t dim, const std::string& what) {
  if (s.kind == "constant" || s.kind == "sinusoidal") {
    if (s.offset.size() != dim) throw ConfigError(what + " offset has the wrong dimension");
    if (s.kind == "sinusoidal" && !(s.period > 0.0)) throw ConfigError(what + " period must be positive");
  } else if (s.kind == "sequence") {
    if (s.values.empty()) throw ConfigError(what + " sequence is empty");
    for (const auto& v : s.values) {
      if (v.size() != dim) throw ConfigError(what + " sequence entry has the wrong dimension");
    }
  } else {
    throw ConfigError(what + " has unknown kind '" + s.kind + "'");
  }
}

}  // namespace

void validate(const ExperimentConfig& c) {
  const std::size_t d = c.A.size();
  if (d == 0 || !rectangular(c.A, d, d)) throw ConfigError("A must be a non-empty square matrix");
  if (c.B.empty()) throw ConfigError("at least one agent input matrix B is required");
  const std::size_t N = c.B.size();
  std::size_t total_k = 0;
  for (const auto& b : c.B) {
    if (b.empty() || !rectangular(b, d, b.front().size()) || b.front().empty()) {
      throw ConfigError("each B must be d x k with k >= 1");
    }
    total_k += b.front().size();
  }
  if (!(c.W >= 0.0) || !std::isfinite(c.W)) throw ConfigError("W must be finite and >= 0");
  if (!c.x0.empty() && c.x0.size() != d) throw ConfigError("x0 has the wrong dimension");
  if (c.agents.size() != N) throw ConfigError("need exactly one agent spec per B matrix");
  if (c.T_grid.empty()) throw ConfigError("T grid is empty");
  for (int T : c.T_grid) {
    if (T < 1) throw ConfigError("every T must be >= 1");
  }
  if (c.trials < 1) throw ConfigError("trials must be >= 1");
  if (c.kappa && !(*c.kappa >= 1.0)) throw ConfigError("kappa override must be >= 1");
  if (c.gamma && !(*c.gamma > 0.0 && *c.gamma <= 1.0)) throw ConfigError("gamma override must lie in (0, 1]");
  if (!(c.U >= 0.0)) throw ConfigError("U must be >= 0");
  for (std::size_t i = 0; i < N; ++i) {
    const AgentSpec& a = c.agents[i];
    const std::string who = "agent " + std::to_string(i);
    if (a.policy != "gpc" && a.policy != "linear") throw ConfigError(who + ": unknown policy '" + a.policy + "'");
    if (a.setting != 1 && a.setting != 2) throw ConfigError(who + ": setting must be 1 or 2");
    if (a.tuning != "thm31" && a.tuning != "thm33" && a.tuning != "thm34" && a.tuning != "manual") {
      throw ConfigError(who + ": unknown tuning rule '" + a.tuning + "'");
    }
    if (a.tuning == "manual" && a.H < 1) throw ConfigError(who + ": manual tuning needs H >= 1");
    if (!(a.eta >= 0.0) || !(a.c_eta > 0.0)) throw ConfigError(who + ": step sizes must be positive");
    if (a.gain != "zero" && a.gain != "synthesize" && a.gain != "explicit") {
      throw ConfigError(who + ": unknown gain source '" + a.gain + "'");
    }
    if (a.gain == "explicit" && !rectangular(a.K, c.B[i].front().size(), d)) {
      throw ConfigError(who + ": explicit gain must be k x d");
    }
    if (c.cost.shared && a.setting != 2) throw ConfigError(who + ": a shared cost requires setting 2");
  }
  const CostConfig& cc = c.cost;
  if (cc.family == "quadratic-tracking") {
    if (!(cc.lambda >= 0.0)) throw ConfigError("cost lambda must be >= 0");
    const std::size_t nt = cc.shared ? 1 : N;
    if (cc.state_targets.size() != 1 && cc.state_targets.size() != nt) {
      throw ConfigError("state targets: give one, or one per agent");
    }
    if (cc.control_targets.size() != 1 && cc.control_targets.size() != nt) {
      throw ConfigError("control targets: give one, or one per agent");
    }
    for (const auto& s : cc.state_targets) check_signal(s, d, "state target");
    for (std::size_t j = 0; j < cc.control_targets.size(); ++j) {
      const std::size_t k = cc.shared ? total_k : c.B[cc.control_targets.size() == 1 ? 0 : j].front().size();
      check_signal(cc.control_targets[j], k, "control target");
    }
    if (!cc.shared && cc.control_targets.size() == 1) {
      for (const auto& b : c.B) {
        if (b.front().size() != cc.control_targets.front().offset.size() && cc.control_targets.front().kind != "sequence") {
          throw ConfigError("a single control target needs every agent to have the same control dimension");
        }
      }
    }
  } else if (cc.family == "lower-bound") {
    if (c.lower_bound.kind.empty()) throw ConfigError("the lower-bound cost family needs lower_bound.kind");
  } else if (cc.family == "linear") {
    if (cc.gx.size() != d) throw ConfigError("linear cost gx has the wrong dimension");
  } else {
    throw ConfigError("unknown cost family '" + cc.family + "'");
  }
  const DisturbanceConfig& dc = c.disturbance;
  try {
    (void)disturbance_kind_from_string(dc.kind);
  } catch (const Error&) {
    throw ConfigError("unknown disturbance kind '" + dc.kind + "'");
  }
  if ((dc.kind == "constant" || dc.kind == "sign-switching") && dc.value.size() != d) {
    throw ConfigError("disturbance value has the wrong dimension");
  }
  if (dc.kind == "explicit-sequence") {
    if (dc.sequence.empty()) throw ConfigError("explicit disturbance sequence is empty");
    for (const auto& v : dc.sequence) {
      if (v.size() != d) throw ConfigError("disturbance sequence entry has the wrong dimension");
    }
  }
  const RegretConfig& r = c.regret;
  if (r.comparator != "dac" && r.comparator != "linear" && r.comparator != "both") {
    throw ConfigError("comparator must be dac, linear or both");
  }
  if (r.solver_iters < 1 || r.solver_restarts < 1 || !(r.solver_tol > 0.0)) {
    throw ConfigError("comparator solver settings must be positive");
  }
  const LowerBoundConfig& lb = c.lower_bound;
  if (!lb.kind.empty()) {
    if (lb.kind != "linear" && lb.kind != "dac") throw ConfigError("lower-bound kind must be linear or dac");
    if (lb.H < 1 || lb.grid_points < 2 || !(lb.c_eta > 0.0)) throw ConfigError("lower-bound settings out of range");
  }
  const EqGapConfig& e = c.eqgap;
  if (e.stride < 0 || !(e.eps > 0.0) || e.iters < 1 || e.smoothness_samples < 1 || !(e.c_eta > 0.0)) {
    throw ConfigError("eqgap settings out of range");
  }
}

}  // namespace magpc::harness
