#include "magpc/agent.hpp"
#include "magpc/bound_audit.hpp"
#include "magpc/counterfactual.hpp"
#include "magpc/dac.hpp"
#include "magpc/disturbance.hpp"
#include "magpc/errors.hpp"
#include "magpc/harness.hpp"
#include "magpc/ogd_memory.hpp"
#include "magpc/random.hpp"
#include "magpc/stability.hpp"
#include "magpc/trace.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace magpc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

Mat gaussian(Rng& rng, int r, int c) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

double spectral_radius(const Mat& A) {
  return Eigen::EigenSolver<Mat>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

// Random multi-agent plant with stabilizing gains and DAC learners.
struct RandomGame {
  LdsSystem sys;
  std::vector<Mat> K;
  StabilityCertificate cert;
  int H = 1;
  CostAssignment costs;
  DisturbanceSpec dist;
  std::vector<AgentConfig> agents;
};

RandomGame random_game(std::uint64_t seed, int max_d, int max_N, int H, bool memory_from_certificate) {
  Rng rng(seed);
  for (;;) {
    RandomGame g;
    const int d = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_d));
    const int N = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_N));
    Mat A = gaussian(rng, d, d);
    const double rho = spectral_radius(A);
    if (rho > 1e-9) A *= rng.uniform(0.2, 0.8) / rho;
    std::vector<Mat> B;
    for (int i = 0; i < N; ++i) B.push_back(0.5 * gaussian(rng, d, 1 + static_cast<int>(rng.next() % 2)));
    g.sys = LdsSystem(A, B, 0.5);
    for (int i = 0; i < N; ++i) {
      g.K.push_back(rng.bernoulli(0.5) ? Mat(0.1 * gaussian(rng, g.sys.k(i), d)) : Mat(Mat::Zero(g.sys.k(i), d)));
    }
    try {
      g.cert = certify_global(A, B, g.K);
    } catch (const Error&) {
      continue;
    }
    g.H = memory_from_certificate
              ? std::max(1, static_cast<int>(std::ceil(std::log(2.0 * g.cert.kappa) / g.cert.gamma)))
              : H;
    if (g.H > 10) continue;
    g.dist.kind = DisturbanceKind::kClippedGaussian;
    g.dist.sigma = 0.3;
    g.dist.seed = rng.next();
    for (int i = 0; i < N; ++i) {
      Vec offset = Vec::Zero(d);
      for (int c = 0; c < d; ++c) offset(c) = rng.uniform(-1.0, 1.0);
      auto cost = std::make_shared<QuadraticTracking>(
          TargetSignal::sinusoidal(offset, 0.3, rng.uniform(10.0, 40.0), rng.next()),
          TargetSignal::constant(Vec::Zero(g.sys.k(i))), rng.uniform(0.05, 1.0));
      g.costs.per_agent.push_back(cost);
      AgentConfig ac;
      ac.index = i;
      ac.K = g.K[static_cast<std::size_t>(i)];
      ac.H = g.H;
      ac.eta = rng.uniform(0.01, 0.2);
      ac.setting = 2;
      ac.set = DacSet::from_certificate(g.cert, g.H, g.sys.k(i), d);
      ac.M_init = random_member(ac.set, rng.next());
      ac.cost = cost;
      ac.peer_memory = g.H;
      g.agents.push_back(std::move(ac));
    }
    return g;
  }
}

Trace play(const RandomGame& g, int T) {
  std::vector<std::unique_ptr<GpcAgent>> owned;
  std::vector<Policy*> ptrs;
  for (const auto& ac : g.agents) {
    owned.push_back(std::make_unique<GpcAgent>(g.sys, ac));
    ptrs.push_back(owned.back().get());
  }
  const DisturbanceGenerator gen(g.dist, g.sys.d(), g.sys.W);
  return simulate(g.sys, ptrs, gen, g.costs, T);
}

double relative(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(b.norm(), 1e-12); }

Outcome state_evolution() {
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    Rng pick(derive_seed(101, static_cast<std::uint64_t>(n)));
    const int H = 1 + static_cast<int>(pick.next() % 5);
    const RandomGame g = random_game(derive_seed(1, static_cast<std::uint64_t>(n)), 4, 3, H, false);
    const Trace tr = play(g, 30);
    Mat Acl = g.sys.A;
    for (int j = 0; j < g.sys.N(); ++j) Acl -= g.sys.B[static_cast<std::size_t>(j)] * g.K[static_cast<std::size_t>(j)];
    const TransferStack stack(Acl, H, 2 * H + 30);
    for (int t = 0; t < tr.T; ++t) {
      for (int h = 0; h <= std::min(t, H + 3); ++h) {
        std::vector<ChannelWindow> hist;
        for (int j = 0; j < g.sys.N(); ++j) {
          ChannelWindow cw{g.sys.B[static_cast<std::size_t>(j)], {}};
          for (int k = 0; k <= h; ++k) cw.M.push_back(tr.M_hist[static_cast<std::size_t>(t - k)][static_cast<std::size_t>(j)]);
          hist.push_back(std::move(cw));
        }
        std::vector<Vec> dist;
        for (int l = 0; l <= H + h; ++l) dist.push_back(t - l >= 0 ? tr.w[static_cast<std::size_t>(t - l)] : Vec(Vec::Zero(g.sys.d())));
        const Vec pred = unroll_state(stack, hist, tr.x[static_cast<std::size_t>(t - h)], dist, h);
        worst = std::max(worst, relative(pred, tr.x[static_cast<std::size_t>(t + 1)]));
      }
      std::vector<Channel> fixed;
      for (int j = 0; j < g.sys.N(); ++j) {
        fixed.push_back({g.sys.B[static_cast<std::size_t>(j)], g.K[static_cast<std::size_t>(j)],
                         tr.M_hist[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)]});
      }
      std::vector<Vec> dist;
      for (int l = 0; l <= 2 * H; ++l) dist.push_back(t - 1 - l >= 0 ? tr.w[static_cast<std::size_t>(t - 1 - l)] : Vec(Vec::Zero(g.sys.d())));
      const Vec y_rec = ideal_state_rollout(stack, fixed, dist);
      const Vec y_mat = ideal_state_transfer(stack, fixed, dist);
      worst = std::max(worst, relative(y_mat, y_rec));
    }
  }
  return {worst <= 1e-8, "max relative error " + num(worst) + " over 100 instances"};
}

Outcome gradient_check() {
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    Rng rng(derive_seed(2, static_cast<std::uint64_t>(n)));
    const int H = 1 + static_cast<int>(rng.next() % 5);
    const RandomGame g = random_game(derive_seed(3, static_cast<std::uint64_t>(n)), 4, 3, H, false);
    Mat Acl = g.sys.A;
    for (int j = 0; j < g.sys.N(); ++j) Acl -= g.sys.B[static_cast<std::size_t>(j)] * g.K[static_cast<std::size_t>(j)];
    const TransferStack stack(Acl, H);
    SurrogateProblem prob;
    prob.stack = &stack;
    prob.self = static_cast<int>(rng.next() % static_cast<std::uint64_t>(g.sys.N()));
    prob.t = static_cast<int>(rng.next() % 50);
    const bool joint = rng.bernoulli(0.5);
    std::shared_ptr<const CostOracle> shared;
    if (joint) {
      Vec offset = Vec::Zero(g.sys.d());
      for (int c = 0; c < offset.size(); ++c) offset(c) = rng.uniform(-1.0, 1.0);
      shared = std::make_shared<QuadraticTracking>(TargetSignal::constant(offset),
                                                   TargetSignal::constant(Vec::Zero(g.sys.total_controls())), 0.3);
      prob.cost = shared.get();
      prob.scope = CostScope::kJoint;
    } else {
      prob.cost = g.costs.per_agent[static_cast<std::size_t>(prob.self)].get();
    }
    for (int j = 0; j < g.sys.N(); ++j) {
      prob.channels.push_back({g.sys.B[static_cast<std::size_t>(j)], g.K[static_cast<std::size_t>(j)],
                               random_member(g.agents[static_cast<std::size_t>(j)].set, rng.next())});
    }
    for (int l = 0; l <= 2 * H; ++l) {
      Vec w(g.sys.d());
      for (int c = 0; c < w.size(); ++c) w(c) = rng.uniform(-0.3, 0.3);
      prob.dist.push_back(w);
    }
    const Vec analytic = surrogate_loss(prob).grad.flatten();
    SurrogateProblem work = prob;
    DacParams& M = work.channels[static_cast<std::size_t>(prob.self)].M;
    const int k = M.k(), d = M.d();
    const Vec m0 = M.flatten();
    Vec fd(m0.size());
    const double h = 1e-5;
    for (Eigen::Index e = 0; e < m0.size(); ++e) {
      Vec m = m0;
      m(e) += h;
      M = DacParams::unflatten(m, H, k, d);
      const double fp = surrogate_value(work);
      m(e) -= 2.0 * h;
      M = DacParams::unflatten(m, H, k, d);
      const double fm = surrogate_value(work);
      fd(e) = (fp - fm) / (2.0 * h);
    }
    worst = std::max(worst, (analytic - fd).norm() / std::max(fd.norm(), 1e-8));
  }
  return {worst <= 1e-5, "max relative error " + num(worst) + " over 100 instances"};
}

Outcome projection_check() {
  double worst_margin = 0.0;
  double worst_idem = 0.0;
  for (int n = 0; n < 50; ++n) {
    Rng rng(derive_seed(4, static_cast<std::uint64_t>(n)));
    const int k = 1 + static_cast<int>(rng.next() % 4);
    const int d = 1 + static_cast<int>(rng.next() % 4);
    const double r = rng.uniform(0.1, 2.0);
    const Mat B = rng.uniform(0.5, 3.0) * gaussian(rng, k, d);
    const Mat P = project_block(B, r);
    const double dist_P = (P - B).norm();
    for (int c = 0; c < 10000; ++c) {
      Mat C = gaussian(rng, k, d);
      if (c % 2 == 1) C = P + rng.uniform(0.0, 0.1) * C;
      const double s = Eigen::JacobiSVD<Mat>(C).singularValues()(0);
      const double target = rng.uniform(0.0, r);
      if (c % 2 == 0 || s > r) C *= (c % 2 == 0 ? target : r) / std::max(s, 1e-300);
      worst_margin = std::min(worst_margin, (C - B).norm() - dist_P);
    }
    worst_idem = std::max(worst_idem, (project_block(P, r) - P).cwiseAbs().maxCoeff());
  }
  return {worst_margin >= -1e-9 && worst_idem <= 1e-12,
          "min margin " + num(worst_margin) + ", idempotence error " + num(worst_idem)};
}

Outcome bound_suite() {
  long violations = 0, evaluated = 0;
  std::string worst_name;
  double worst_ratio = 0.0;
  for (int n = 0; n < 50; ++n) {
    const RandomGame g = random_game(derive_seed(5, static_cast<std::uint64_t>(n)), 3, 3, 0, true);
    const Trace tr = play(g, 120);
    BoundInputs in;
    in.kappa = g.cert.kappa;
    in.gamma = g.cert.gamma;
    in.W = g.sys.W;
    in.sum_B = g.sys.sum_B_norms();
    in.max_B = g.sys.max_B_norm();
    in.H = g.H;
    in.d = g.sys.d();
    in.tau = g.agents.front().set.tau;
    if (!memory_long_enough(in)) return {false, "generator produced a short-memory instance"};
    const BoundAudit audit = audit_bounds(tr, g.sys, g.costs, in);
    violations += audit.violations();
    for (const auto& c : audit.checks) {
      evaluated += c.evaluated;
      if (c.worst_ratio > worst_ratio) {
        worst_ratio = c.worst_ratio;
        worst_name = c.name;
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violation(s) in " + std::to_string(evaluated) +
                               " checks; tightest " + worst_name + " at " + num(worst_ratio) + " of its bound"};
}

Outcome ogd_memory_check() {
  long violations = 0;
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    Rng rng(derive_seed(8, static_cast<std::uint64_t>(n)));
    const int H = 1 + static_cast<int>(rng.next() % 5);
    Vec alpha(H + 1);
    for (int j = 0; j <= H; ++j) alpha(j) = rng.uniform(0.1, 1.0);
    const int dim = 1 + static_cast<int>(rng.next() % 5);
    const SyntheticMemoryLoss loss(alpha, dim, rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.next());
    const double D0 = loss.diameter(), G0 = loss.gradient_bound(), L = loss.lipschitz();
    const int T = 2000;
    const double eta = D0 / std::sqrt((G0 * G0 + L * H * H * G0) * T);
    const OgdMemoryResult res = ogd_with_memory(loss, ball_projector(loss.radius()), Vec::Zero(dim), eta, T);
    const double bound = ogd_memory_bound(D0, G0, L, H, eta, T);
    if (res.regret > bound) ++violations;
    worst = std::max(worst, res.regret / bound);
  }
  return {violations == 0, std::to_string(violations) + " violation(s); largest regret/bound " + num(worst)};
}

// Runs one harness command and condenses its check lines.
Outcome harness_run(const std::function<int(std::ostream&)>& run) {
  std::ostringstream log;
  int code = 0;
  try {
    code = run(log);
  } catch (const Error& e) {
    return {false, std::string("error: ") + e.what()};
  }
  std::istringstream lines(log.str());
  std::string line, detail;
  while (std::getline(lines, line)) {
    if (line.rfind("check ", 0) != 0) continue;
    if (!detail.empty()) detail += "; ";
    detail += line.substr(6);
  }
  return {code == 0, detail};
}

harness::RunOptions checked(const fs::path& dir, int jobs) { return {dir.string(), jobs, true}; }

harness::ExperimentConfig formation(int setting, const std::string& tuning) {
  auto cfg = harness::preset("formation-toy");
  for (auto& a : cfg.agents) {
    a.setting = setting;
    a.tuning = tuning;
  }
  harness::validate(cfg);
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Re-runs the manifest written in `dir` and compares every CSV it emitted.
Outcome rerun_identical(const fs::path& dir, const fs::path& again, int jobs,
                        int (*run)(const harness::ExperimentConfig&, const harness::RunOptions&, std::ostream&)) {
  std::ostringstream sink;
  const auto cfg = harness::load_config((dir / "manifest.json").string());
  fs::remove_all(again);
  run(cfg, {again.string(), jobs, false}, sink);
  int files = 0, diffs = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    const fs::path twin = again / fs::relative(e.path(), dir);
    if (!fs::exists(twin) || slurp(e.path()) != slurp(twin)) ++diffs;
  }
  return {files > 0 && diffs == 0, std::to_string(files) + " csv file(s), " + std::to_string(diffs) + " differ"};
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the decentralized online control toolkit"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  int jobs = 1;
  app.add_option("--out", out, "scratch directory for harness runs");
  app.add_option("--only", only, "criteria to run (default: all)");
  app.add_option("--jobs", jobs, "worker threads for harness runs")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  const fs::path base(out);

  const std::vector<Criterion> criteria{
      {1, "state evolution: transfer unrolling matches simulation", 10, state_evolution},
      {2, "surrogate gradient matches central differences", 30, gradient_check},
      {3, "projection optimality and idempotence", 10, projection_check},
      {4, "transfer, magnitude, deviation, gradient and surrogate bounds", 60, bound_suite},
      {5, "sublinear regret with shared information", 300,
       [&] {
         return harness_run([&](std::ostream& log) {
           return harness::run_regret(formation(2, "thm33"), checked(base / "c5", jobs), log);
         });
       }},
      {6, "sublinear regret with independent learners", 300,
       [&] {
         return harness_run([&](std::ostream& log) {
           return harness::run_regret(formation(1, "thm31"), checked(base / "c6", jobs), log);
         });
       }},
      {7, "lower-bound instances scale like sqrt(T)", 120,
       [&] {
         const Outcome lin = harness_run([&](std::ostream& log) {
           return harness::run_lower_bound(harness::preset("lower-bound-linear"), checked(base / "c7-linear", jobs), log);
         });
         const Outcome dac = harness_run([&](std::ostream& log) {
           return harness::run_lower_bound(harness::preset("lower-bound-dac"), checked(base / "c7-dac", jobs), log);
         });
         return Outcome{lin.pass && dac.pass, "linear: " + lin.detail + " | dac: " + dac.detail};
       }},
      {8, "online gradient descent with memory stays under its bound", 60, ogd_memory_check},
      {9, "equilibrium gap decays in the static common-interest game", 300,
       [&] {
         return harness_run([&](std::ostream& log) {
           return harness::run_eqgap(harness::preset("scalar-duopoly"), checked(base / "c9", jobs), log);
         });
       }},
      {10, "disturbance recovery identities", 60,
       [&] {
         std::string detail;
         bool pass = true;
         for (int setting : {1, 2}) {
           auto cfg = harness::preset("grid-toy");
           cfg.T_grid = {500};
           cfg.trials = 3;
           for (auto& a : cfg.agents) a.setting = setting;
           const Outcome o = harness_run([&](std::ostream& log) {
             return harness::run_simulate(cfg, checked(base / ("c10-setting" + std::to_string(setting)), jobs), log);
           });
           pass = pass && o.pass;
           detail += (detail.empty() ? "" : " | ") + std::string("setting ") + std::to_string(setting) + ": " + o.detail;
         }
         return Outcome{pass, detail};
       }},
      {11, "manifest re-runs reproduce every CSV byte for byte", 120,
       [&] {
         std::ostringstream sink;
         auto sim = harness::preset("grid-toy");
         sim.T_grid = {300};
         sim.trials = 2;
         harness::run_simulate(sim, {(base / "c11-sim").string(), jobs, false}, sink);
         auto reg = harness::preset("formation-toy");
         reg.T_grid = {256, 512};
         reg.trials = 2;
         harness::run_regret(reg, {(base / "c11-regret").string(), jobs, false}, sink);
         auto lb = harness::preset("lower-bound-dac");
         lb.T_grid = {100, 1000};
         lb.trials = 5;
         harness::run_lower_bound(lb, {(base / "c11-lb").string(), jobs, false}, sink);
         auto eq = harness::preset("scalar-duopoly");
         eq.T_grid = {256, 1024};
         harness::run_eqgap(eq, {(base / "c11-eq").string(), jobs, false}, sink);
         const Outcome parts[] = {
             rerun_identical(base / "c11-sim", base / "c11-sim-again", jobs, harness::run_simulate),
             rerun_identical(base / "c11-regret", base / "c11-regret-again", jobs, harness::run_regret),
             rerun_identical(base / "c11-lb", base / "c11-lb-again", jobs, harness::run_lower_bound),
             rerun_identical(base / "c11-eq", base / "c11-eq-again", jobs, harness::run_eqgap)};
         Outcome o{true, ""};
         const char* names[] = {"simulate", "regret", "lower-bound", "eqgap"};
         for (int k = 0; k < 4; ++k) {
           o.pass = o.pass && parts[k].pass;
           o.detail += (k ? "; " : "") + std::string(names[k]) + ": " + parts[k].detail;
         }
         return o;
       }},
  };

  fs::create_directories(base);
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << " - " << c.name << " (" << o.detail
              << "; " << num(secs, 3) << " s" << (in_time ? "" : ", over the " + num(c.limit_seconds) + " s limit")
              << ")" << std::endl;
  }
  return failed == 0 ? 0 : 4;
}
