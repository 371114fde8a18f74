#pragma once

#include "magpc/agent.hpp"
#include "magpc/bounds.hpp"
#include "magpc/costs.hpp"
#include "magpc/disturbance.hpp"
#include "magpc/lds.hpp"
#include "magpc/stability.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace magpc::harness {

inline constexpr const char* kVersion = "1.0.0";

struct SignalConfig {
  std::string kind = "constant";  // constant | sinusoidal | sequence
  std::vector<double> offset;
  double amplitude = 0.0;
  double period = 1.0;
  std::vector<std::vector<double>> values;
};

struct CostConfig {
  std::string family = "quadratic-tracking";  // quadratic-tracking | linear
  bool shared = false;  // one oracle on [u^1; ...; u^N] for every agent
  double lambda = 1.0;
  std::vector<SignalConfig> state_targets;    // one, or one per agent
  std::vector<SignalConfig> control_targets;  // one, or one per agent
  std::vector<double> gx, gu;
  double c0 = 0.0;
};

struct AgentSpec {
  std::string policy = "gpc";     // gpc | linear
  int setting = 2;
  std::string tuning = "thm33";   // thm31 | thm33 | thm34 | manual
  int H = 0;                      // manual
  double eta = 0.0;               // manual
  double c_eta = 1.0;
  std::string gain = "zero";      // zero | synthesize | explicit
  std::vector<std::vector<double>> K;
};

struct DisturbanceConfig {
  std::string kind = "constant";
  std::vector<double> value;
  double amplitude = 0.0;
  double period = 1.0;
  double sigma = 1.0;
  double clip = -1.0;
  double probability = 0.5;
  std::vector<std::vector<double>> sequence;
};

struct RegretConfig {
  std::string comparator = "dac";  // dac | linear | both
  int burn_in = -1;                // < 0: the agent's memory H
  int solver_iters = 20000;
  double solver_tol = 1e-8;
  int solver_restarts = 5;
  std::vector<double> linear_lo, linear_hi;
  int linear_points = 101;
  double slope_threshold_setting1 = 0.70;
  double slope_threshold_setting2 = 0.65;
};

struct LowerBoundConfig {
  std::string kind;  // linear | dac; empty when not a lower-bound experiment
  int H = 2;
  double kappa = 1.0;
  double gamma = 0.5;
  int grid_points = 101;
  double c_eta = 1.0;
  double x0 = 1.0;
  double ratio_lo = 0.05;
  double ratio_hi = 5.0;
  double ratio_spread = 2.0;
  double cost_tolerance = 0.01;
};

struct EqGapConfig {
  int stride = 0;
  double eps = 1e-7;
  int iters = 10000;
  int smoothness_samples = 64;
  double c_eta = 1.0;  // eta = c_eta / L_hat
  double ratio_threshold = 0.6;
  double path_tolerance = 1e-8;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::vector<std::vector<double>> A;
  std::vector<std::vector<std::vector<double>>> B;
  double W = 1.0;
  std::vector<double> x0;
  std::optional<double> kappa;  // loosened certificate values
  std::optional<double> gamma;
  double U = 1.0;  // assumed bound on other agents' controls (setting 1 tuning)
  DisturbanceConfig disturbance;
  CostConfig cost;
  std::vector<AgentSpec> agents;
  std::vector<int> T_grid = {1000};
  int trials = 1;
  std::uint64_t seed = 1;
  bool write_traces = false;
  RegretConfig regret;
  LowerBoundConfig lower_bound;
  EqGapConfig eqgap;
};

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);
std::string to_json_string(const ExperimentConfig& cfg);
ExperimentConfig from_json_string(const std::string& text);
// Reads a config file; a manifest written by `run` is accepted as well.
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

// Everything concrete about one (T, trial) cell.
struct Instance {
  LdsSystem sys;
  CostAssignment costs;
  DisturbanceSpec disturbance;
  Vec x0;
  std::vector<Mat> K;
  StabilityCertificate global;
  std::vector<StabilityCertificate> own;
  std::vector<AgentConfig> agents;
  std::vector<std::string> policy;
  BoundInputs bounds;
};

Instance build_instance(const ExperimentConfig& cfg, int T, std::uint64_t cell_seed);

struct RunOptions {
  std::string out_dir = "out";
  int jobs = 1;
  bool check = false;
};

// Each returns a process exit code (0, or 4 when a --check threshold fails).
int run_simulate(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);
int run_regret(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);
int run_lower_bound(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);
int run_eqgap(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);

// Blocks introduced by "# A", "# B1", "# K1", ... with comma-separated rows.
struct MatrixFile {
  Mat A;
  std::vector<Mat> B;
  std::vector<Mat> K;
};
MatrixFile read_matrix_file(const std::string& path);
void print_certificates(const MatrixFile& mf, std::ostream& os);

}  // namespace magpc::harness
