#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hmclq/experiment.hpp"
#include "hmclq/io.hpp"

using namespace hmclq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

} // namespace

TEST_CASE("density files round-trip exactly") {
  Grid g(3.0, 33);
  TargetDensity f = double_well_target();
  GridDensity d = f.on_grid(g);
  fs::path p = fs::temp_directory_path() / "hmclq_density_rt.txt";
  write_density(p.string(), d);
  GridDensity back = read_density(p.string());
  REQUIRE(back.grid() == g);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(back[i] == d[i]);
  fs::remove(p);
}

TEST_CASE("config validation names the offending exponent") {
  nlohmann::json j = preset_config("gaussian-quarter-turn");
  j["exponents"] = {2.0, 1.0};
  try {
    config_from_json(j);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("q > 1") != std::string::npos);
    CHECK(msg.find("1.0") != std::string::npos);
  }
}

TEST_CASE("config validation rejects inconsistent flow choices") {
  nlohmann::json j;
  j["target"] = "double-well-1d";
  j["flow"] = "exact-rotation";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);

  nlohmann::json k = preset_config("double-well-leapfrog");
  k["steps"] = 0;
  CHECK_THROWS_AS(config_from_json(k), ConfigError);
}

TEST_CASE("the preset catalog covers the advertised scenarios") {
  auto cat = preset_catalog();
  std::vector<std::string> want = {
      "gaussian-quarter-turn", "gaussian-mixing",       "gaussian-resonant",
      "gaussian-2d-quarter-turn", "double-well-leapfrog",
      "skewed-momentum-leapfrog", "gaussian-sampler-check"};
  for (const auto& name : want) {
    bool found = false;
    for (const auto& [n, j] : cat)
      if (n == name) {
        found = true;
        CHECK_NOTHROW(config_from_json(j));
      }
    CHECK(found);
  }
  CHECK_THROWS_AS(preset_config("no-such-preset"), ConfigError);
}

TEST_CASE("a small run produces trace, report, spectral data and a manifest") {
  nlohmann::json j = preset_config("gaussian-quarter-turn");
  j["grid_points"] = 128;
  j["iterations"] = 6;
  ExperimentConfig cfg = config_from_json(j);
  fs::path out = fs::temp_directory_path() / "hmclq_run_small";
  fs::remove_all(out);
  ExperimentResult res = run_experiment(cfg, out);
  CHECK(res.all_passed);
  CHECK(fs::exists(out / "trace.tsv"));
  CHECK(fs::exists(out / "lemma_report.tsv"));
  CHECK(fs::exists(out / "spectral.txt"));
  CHECK(fs::exists(out / "manifest.json"));
  nlohmann::json manifest;
  std::ifstream(out / "manifest.json") >> manifest;
  CHECK(manifest["checks"]["fail"] == 0);
  CHECK(manifest["config"]["grid_points"] == 128);
  CHECK(manifest["seed"] == cfg.seed);
  // every labelled check carries a residual and a status
  std::string report = slurp(out / "lemma_report.tsv");
  CHECK(report.find("prop-of-nbc/holder") != std::string::npos);
  CHECK(report.find("cT-prop/fixed-point") != std::string::npos);
  CHECK(report.find("cTs/duality") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("reruns with the same seed are byte-identical") {
  nlohmann::json j = preset_config("gaussian-mixing");
  j["grid_points"] = 128;
  j["iterations"] = 10;
  ExperimentConfig cfg = config_from_json(j);
  fs::path o1 = fs::temp_directory_path() / "hmclq_rep_a";
  fs::path o2 = fs::temp_directory_path() / "hmclq_rep_b";
  fs::remove_all(o1);
  fs::remove_all(o2);
  run_experiment(cfg, o1);
  run_experiment(cfg, o2);
  for (const char* name : {"trace.tsv", "lemma_report.tsv", "spectral.txt",
                           "manifest.json"})
    CHECK(slurp(o1 / name) == slurp(o2 / name));
  fs::remove_all(o1);
  fs::remove_all(o2);
}

TEST_CASE("the resonant preset runs with a warning and reported rows") {
  nlohmann::json j = preset_config("gaussian-resonant");
  j["grid_points"] = 128;
  j["iterations"] = 6;
  ExperimentConfig cfg = config_from_json(j);
  fs::path out = fs::temp_directory_path() / "hmclq_run_res";
  fs::remove_all(out);
  ExperimentResult res = run_experiment(cfg, out);
  CHECK(res.all_passed);
  REQUIRE_FALSE(res.warnings.empty());
  CHECK(res.warnings.front().find("resonant") != std::string::npos);
  bool has_na = false;
  for (const auto& row : res.checks)
    if (row.status == CheckStatus::NotApplicable) has_na = true;
  CHECK(has_na);
  fs::remove_all(out);
}

TEST_CASE("matrix files carry the header and full precision") {
  TargetDensity f = gaussian_target(1);
  TransferOperator op(
      PhaseFlow(FlowKind::ExactGaussianRotation, 1.0,
                HamiltonianEnergy{f, gaussian_momentum(1)}),
      Grid(8.0, 32));
  fs::path p = fs::temp_directory_path() / "hmclq_matrix.txt";
  write_matrix(p.string(), op.assemble_matrix());
  std::string text = slurp(p);
  CHECK(text.rfind("hmclq-matrix 1", 0) == 0);
  fs::remove(p);
}
