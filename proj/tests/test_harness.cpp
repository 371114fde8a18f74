#include "magpc/errors.hpp"
#include "magpc/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace magpc;
using namespace magpc::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("magpc_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Config, EveryPresetValidates) {
  for (const auto& name : preset_names()) EXPECT_NO_THROW(validate(preset(name))) << name;
  EXPECT_THROW(preset("missing"), ConfigError);
}

TEST(Config, JsonRoundTrips) {
  for (const auto& name : preset_names()) {
    const ExperimentConfig c = preset(name);
    EXPECT_EQ(to_json_string(from_json_string(to_json_string(c))), to_json_string(c)) << name;
  }
}

TEST(Config, UnknownKeysAndBadValuesAreConfigErrors) {
  std::string text = to_json_string(preset("scalar-duopoly"));
  const std::string typo = text.substr(0, text.find('{') + 1) + "\"tirals\": 3, " + text.substr(text.find('{') + 1);
  try {
    from_json_string(typo);
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.exit_code(), 2);
  }
  EXPECT_THROW(from_json_string("{not json"), ConfigError);
  ExperimentConfig c = preset("scalar-duopoly");
  c.trials = 0;
  EXPECT_THROW(validate(c), ConfigError);
  c = preset("scalar-duopoly");
  c.agents[0].setting = 3;
  EXPECT_THROW(validate(c), ConfigError);
  c = preset("scalar-duopoly");
  c.B.push_back({{1.0}, {2.0}});
  EXPECT_THROW(validate(c), Error);
}

TEST(Run, SimulateWritesManifestAndClearsMarker) {
  ExperimentConfig c = preset("grid-toy");
  c.T_grid = {60};
  c.trials = 2;
  const fs::path dir = scratch("sim");
  std::ostringstream log;
  EXPECT_EQ(run_simulate(c, {dir.string(), 1, true}, log), 0);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "simulate.csv"));
  EXPECT_FALSE(fs::exists(dir / "INCOMPLETE"));
  EXPECT_NE(log.str().find("check recovery: pass"), std::string::npos);
}

TEST(Run, ManifestRerunIsByteIdenticalAcrossJobCounts) {
  ExperimentConfig c = preset("formation-toy");
  c.T_grid = {128, 256};
  c.trials = 2;
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  std::ostringstream log;
  run_regret(c, {a.string(), 1, false}, log);
  run_regret(load_config((a / "manifest.json").string()), {b.string(), 2, false}, log);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / fs::relative(e.path(), a))) << e.path();
  }
  EXPECT_GT(files, 3);
}

TEST(Run, EqGapChecksPassOnTheStaticGame) {
  ExperimentConfig c = preset("scalar-duopoly");
  c.T_grid = {256, 1024};
  std::ostringstream log;
  EXPECT_EQ(run_eqgap(c, {scratch("eq").string(), 1, true}, log), 0) << log.str();
}

TEST(Run, OverlargeStepBreaksThePathLengthInequality) {
  ExperimentConfig c = preset("scalar-duopoly");
  c.T_grid = {256};
  c.eqgap.c_eta = 50.0;
  std::ostringstream log;
  try {
    EXPECT_EQ(run_eqgap(c, {scratch("eq_bad").string(), 1, true}, log), 4);
    EXPECT_NE(log.str().find("check path-length: FAIL"), std::string::npos) << log.str();
  } catch (const DivergenceError&) {
    SUCCEED() << "the oversized step diverged outright";
  }
}

TEST(Certify, MatrixFileParses) {
  const fs::path f = scratch("sys.csv");
  std::ofstream(f) << "# A\n0.9,0.3\n0,0.8\n# B1\n1\n0\n# K1\n0.2,0.1\n";
  const MatrixFile mf = read_matrix_file(f.string());
  EXPECT_EQ(mf.A.rows(), 2);
  ASSERT_EQ(mf.B.size(), 1u);
  ASSERT_EQ(mf.K.size(), 1u);
  std::ostringstream os;
  print_certificates(mf, os);
  EXPECT_NE(os.str().find("kappa="), std::string::npos);
  EXPECT_NE(os.str().find("global:"), std::string::npos);
}
