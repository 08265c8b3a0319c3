// Command-line front end: config-driven runs, bundled reproduction recipes,
// config validation and recurring-probability estimation.

#include <CLI11.hpp>

#include <iostream>

#include "remer/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::string& seeds, int jobs, bool timing) {
  remer::ExperimentConfig cfg = remer::ExperimentConfig::load(config_path);
  if (!seeds.empty()) cfg.seeds = remer::parse_seed_spec(seeds);
  cfg.check();
  const remer::RunOutputs out = remer::run_experiment(cfg, out_dir, jobs, timing);
  std::cout << "wrote " << out.metrics_csv.string() << " (hash "
            << remer::to_hex(out.metrics_hash) << ")\n"
            << "wrote " << out.manifest.string() << "\n"
            << "wrote " << out.summary.string() << "\n";
  return kExitOk;
}

int repro_command(const std::string& which, const std::string& out_dir) {
  std::vector<std::string> summary;
  if (which == "fig1") {
    summary = remer::repro_fig1(out_dir).summary;
  } else if (which == "gridworld-tce") {
    summary = remer::repro_gridworld_tce(out_dir).summary;
  } else if (which == "noise") {
    summary = remer::repro_noise(out_dir).summary;
  } else if (which == "h-correlation") {
    summary = remer::repro_h_correlation(out_dir).summary;
  } else if (which == "h-variance") {
    summary = remer::repro_h_variance(out_dir).summary;
  } else {
    throw remer::ConfigError(
        "unknown recipe '" + which +
        "'; valid: fig1, gridworld-tce, noise, h-correlation, h-variance");
  }
  for (const auto& line : summary) std::cout << line << '\n';
  return kExitOk;
}

int validate_command(const std::string& config_path) {
  const remer::ExperimentConfig cfg = remer::ExperimentConfig::load(config_path);
  std::cout << cfg.echo();
  return kExitOk;
}

int recurrence_command(const std::string& config_path, const std::string& out_dir) {
  const remer::ExperimentConfig cfg = remer::ExperimentConfig::load(config_path);
  const auto rows = remer::estimate_recurrence(cfg);
  for (const auto& r : rows)
    std::cout << "checkpoint " << r.checkpoint << ": eps_pi = " << r.eps_pi << '\n';
  if (!out_dir.empty()) {
    const auto path = remer::write_recurrence_csv(cfg, rows, out_dir);
    std::cout << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular experience-replay prioritization laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", seeds, recipe;
  int jobs = 1;
  bool timing = false;

  auto* run = app.add_subcommand("run", "Run a config and write metrics CSVs");
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seeds", seeds, "Seed override, e.g. 0..9 or 1,2,5");
  run->add_option("--jobs", jobs, "Worker threads over (config x seed)");
  run->add_flag("--timing", timing, "Populate wall_ms (voids byte reproducibility)");

  auto* repro = app.add_subcommand("repro", "Run a bundled reproduction recipe");
  repro->add_option("recipe", recipe, "fig1 | gridworld-tce | noise | h-correlation | h-variance")
      ->required();
  repro->add_option("--out", out_dir, "Output directory");

  auto* validate = app.add_subcommand("validate", "Parse a config and echo resolved values");
  validate->add_option("--config", config_path, "Experiment config file")->required();

  auto* recurrence =
      app.add_subcommand("recurrence", "Exact recurring probability of checkpoint policies");
  recurrence->add_option("--config", config_path, "Experiment config file")->required();
  recurrence->add_option("--out", out_dir, "Output directory for the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return run_command(config_path, out_dir, seeds, jobs, timing);
    if (repro->parsed()) return repro_command(recipe, out_dir);
    if (validate->parsed()) return validate_command(config_path);
    if (recurrence->parsed()) return recurrence_command(config_path, out_dir);
  } catch (const remer::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
