// Command-line driver for the transfer-operator laboratory.
//
// Verbs:
//   run              run an experiment from a config file or preset
//   list-presets     show the preset catalog
//   validate-config  parse and validate a config file, report problems
//   dump-matrix      assemble the operator matrix and write it to a file

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmclq/experiment.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw hmclq::ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw hmclq::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return j;
}

hmclq::ExperimentConfig resolve_config(const std::string& config_path,
                                       const std::string& preset,
                                       std::uint64_t seed_override, bool has_seed) {
  nlohmann::json j;
  if (!preset.empty())
    j = hmclq::preset_config(preset);
  else if (!config_path.empty())
    j = load_json(config_path);
  else
    throw hmclq::ConfigError("provide a config file or --preset");
  if (has_seed) j["seed"] = seed_override;
  if (const char* env = std::getenv("HMCLQ_SEED"); env && !has_seed)
    j["seed"] = std::strtoull(env, nullptr, 10);
  return hmclq::config_from_json(j);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the HMC transfer operator"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir = "out", matrix_path = "matrix.txt";
  std::uint64_t seed = 0;
  bool has_seed = false;

  auto* run = app.add_subcommand("run", "run an experiment");
  run->add_option("config", config_path, "JSON config file");
  run->add_option("--preset", preset, "named preset instead of a config file");
  run->add_option("--out", out_dir, "output directory (default: out)");
  run->add_option("--seed", seed, "override the RNG seed")
      ->each([&](const std::string&) { has_seed = true; });

  auto* lp = app.add_subcommand("list-presets", "show the preset catalog");

  auto* vc = app.add_subcommand("validate-config", "validate a config file");
  vc->add_option("config", config_path, "JSON config file")->required();

  auto* dm = app.add_subcommand("dump-matrix", "assemble and write the operator matrix");
  dm->add_option("config", config_path, "JSON config file");
  dm->add_option("--preset", preset, "named preset instead of a config file");
  dm->add_option("--out", matrix_path, "output file (default: matrix.txt)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (lp->parsed()) {
      for (const auto& [name, j] : hmclq::preset_catalog())
        std::cout << name << "\t" << j.dump() << "\n";
      return 0;
    }
    if (vc->parsed()) {
      hmclq::config_from_json(load_json(config_path));
      std::cout << "config ok\n";
      return 0;
    }
    hmclq::ExperimentConfig cfg = resolve_config(config_path, preset, seed, has_seed);
    if (dm->parsed()) {
      hmclq::TargetDensity target = hmclq::make_target(cfg.target_name);
      hmclq::MomentumDensity momentum =
          hmclq::make_momentum(cfg.momentum_name, target.dim, cfg.momentum_quad_nodes);
      double extent = cfg.grid_extent > 0 ? cfg.grid_extent : target.half_extent;
      hmclq::Grid grid(target.dim, std::vector<double>(target.dim, extent),
                       std::vector<int>(target.dim, cfg.grid_points));
      hmclq::FlowKind kind = cfg.flow_kind == "leapfrog"
                                 ? hmclq::FlowKind::Leapfrog
                                 : hmclq::FlowKind::ExactGaussianRotation;
      hmclq::PhaseFlow flow(kind, cfg.flow_time,
                            hmclq::HamiltonianEnergy{target, momentum}, cfg.flow_steps);
      hmclq::TransferOperator op(flow, grid);
      hmclq::write_matrix(matrix_path, op.assemble_matrix());
      std::cout << "wrote " << matrix_path << " (" << grid.size() << " x "
                << grid.size() << ")\n";
      return 0;
    }
    // run
    hmclq::ExperimentResult res = hmclq::run_experiment(cfg, out_dir);
    for (const auto& w : res.warnings) std::cout << "warning: " << w << "\n";
    for (const auto& row : res.checks)
      std::cout << "[" << hmclq::status_name(row.status) << "] " << row.label
                << "  residual=" << row.residual << "\n";
    std::cout << (res.all_passed ? "all checks passed" : "CHECK FAILURES") << "; "
              << res.artifacts.size() << " artifacts in " << out_dir << "\n";
    return res.all_passed ? 0 : 1;
  } catch (const hmclq::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
