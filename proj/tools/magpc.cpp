#include "magpc/agent.hpp"
#include "magpc/csv.hpp"
#include "magpc/errors.hpp"
#include "magpc/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

using namespace magpc;
using namespace magpc::harness;

struct CommonFlags {
  std::string config;
  std::string preset;
  std::string T;
  int trials = 0;
  long long seed = -1;
  int jobs = 1;
  std::string out = "out";
  int setting = 0;
  std::string tuning;
  bool check = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "experiment config file (JSON) or an emitted manifest");
  cmd->add_option("--preset", f.preset, "scenario preset")
      ->check(CLI::IsMember(preset_names()));
  cmd->add_option("--T", f.T, "horizon or comma-separated horizon grid");
  cmd->add_option("--trials", f.trials, "trials per horizon")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "master seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--jobs", f.jobs, "worker threads across cells")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--setting", f.setting, "information setting for every agent")->check(CLI::IsMember({1, 2}));
  cmd->add_option("--tuning", f.tuning, "step-size / memory rule for every agent")
      ->check(CLI::IsMember({"thm31", "thm33", "thm34", "manual"}));
  cmd->add_flag("--check", f.check, "exit with status 4 when an acceptance threshold fails");
}

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 1 || v > 1000000000L) throw std::invalid_argument(item);
      out.push_back(static_cast<int>(v));
    } catch (const std::exception&) {
      throw ConfigError("--T expects positive integers, got '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--T is empty");
  return out;
}

ExperimentConfig resolve(const CommonFlags& f) {
  if (!f.config.empty() && !f.preset.empty()) throw ConfigError("give either --config or --preset, not both");
  if (f.config.empty() && f.preset.empty()) throw ConfigError("one of --config or --preset is required");
  ExperimentConfig cfg = f.config.empty() ? preset(f.preset) : load_config(f.config);
  if (!f.T.empty()) cfg.T_grid = parse_grid(f.T);
  if (f.trials > 0) cfg.trials = f.trials;
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  for (auto& a : cfg.agents) {
    if (f.setting != 0) a.setting = f.setting;
    if (!f.tuning.empty()) a.tuning = f.tuning;
  }
  validate(cfg);
  return cfg;
}

RunOptions run_options(const CommonFlags& f) { return {f.out, f.jobs, f.check}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized online control toolkit"};
  app.require_subcommand(1);

  CommonFlags sim_f, reg_f, lb_f, eq_f;
  auto* sim = app.add_subcommand("simulate", "run agents and write traces");
  add_common(sim, sim_f);
  auto* reg = app.add_subcommand("regret", "regret against best-in-hindsight comparators");
  add_common(reg, reg_f);
  auto* lb = app.add_subcommand("lower-bound", "lower-bound instance experiment");
  add_common(lb, lb_f);
  auto* eq = app.add_subcommand("eqgap", "equilibrium-gap tracking in the common-interest game");
  add_common(eq, eq_f);

  auto* cert = app.add_subcommand("certify", "strong-stability certificates for a system");
  std::string matrix_file;
  cert->add_option("--matrix-file", matrix_file, "blocks '# A', '# B1', '# K1', ... of CSV rows")->required();

  auto* tune = app.add_subcommand("tune", "memory length and step size from a tuning rule");
  std::string rule = "thm33";
  double kappa = 1.0, gamma = 0.5, G = 1.0, W = 1.0, U = 1.0, max_B = 1.0, c_eta = 1.0;
  int N = 1, T = 1000;
  tune->add_option("--tuning", rule, "rule")->check(CLI::IsMember({"thm31", "thm33", "thm34"}));
  tune->add_option("--kappa", kappa, "strong-stability kappa");
  tune->add_option("--gamma", gamma, "strong-stability gamma");
  tune->add_option("--N", N, "number of agents");
  tune->add_option("--T", T, "horizon");
  tune->add_option("--G", G, "cost gradient constant (thm31)");
  tune->add_option("--W", W, "disturbance bound (thm31)");
  tune->add_option("--U", U, "assumed control bound of other agents (thm31)");
  tune->add_option("--max-B", max_B, "largest input-matrix norm (thm31)");
  tune->add_option("--c-eta", c_eta, "step-size constant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return run_simulate(resolve(sim_f), run_options(sim_f), std::cout);
    if (reg->parsed()) return run_regret(resolve(reg_f), run_options(reg_f), std::cout);
    if (lb->parsed()) return run_lower_bound(resolve(lb_f), run_options(lb_f), std::cout);
    if (eq->parsed()) return run_eqgap(resolve(eq_f), run_options(eq_f), std::cout);
    if (cert->parsed()) {
      print_certificates(read_matrix_file(matrix_file), std::cout);
      return 0;
    }
    if (tune->parsed()) {
      Tuning t;
      if (rule == "thm31") {
        t = tune_setting1({G, W, N, U, max_B, kappa, gamma, T, c_eta});
      } else {
        const Setting2Constants c{N, kappa, gamma, T, c_eta};
        t = rule == "thm33" ? tune_setting2(c) : tune_setting2_lipschitz(c);
      }
      std::cout << "H=" << t.H << " eta=" << fmt17(t.eta) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
