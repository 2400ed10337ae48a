// Command-line front end: simulate | correlate | prony | estimate | sweep.
//
// Exit codes: 0 success, 2 configuration/validation error, 3 numeric failure.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "glekit/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment config file (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "Output directory (overrides the config)");
  cmd->add_option("--seed", args.seed, "Master seed (overrides the config)")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

glekit::ExperimentConfig load_config(const CommonArgs& args) {
  glekit::ExperimentConfig cfg = glekit::ExperimentConfig::load(args.config_path);
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.seed_set) cfg.master_seed = args.seed;
  return cfg;
}

void apply_loss_selection(glekit::ExperimentConfig& cfg, const std::string& loss) {
  if (loss.empty() || loss == "all") {
    cfg.losses = {glekit::LossKind::E, glekit::LossKind::E1, glekit::LossKind::E2};
    cfg.with_theta_l = true;
    return;
  }
  cfg.with_theta_l = false;
  if (loss == "E")
    cfg.losses = {glekit::LossKind::E};
  else if (loss == "E1")
    cfg.losses = {glekit::LossKind::E1};
  else if (loss == "E2")
    cfg.losses = {glekit::LossKind::E2};
  else
    throw glekit::validation_error("--loss must be one of E, E1, E2, all");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-kernel estimation for generalized Langevin dynamics"};
  app.require_subcommand(1);

  CommonArgs sim_args, corr_args, prony_args, est_args, sweep_args;
  std::string loss_flag;
  std::string axis_flag;
  std::vector<double> grid_flag;

  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "Generate trajectories and noisy observations");
  add_common(cmd_simulate, sim_args);

  CLI::App* cmd_correlate =
      app.add_subcommand("correlate", "Estimate correlation functions from observations");
  add_common(cmd_correlate, corr_args);

  CLI::App* cmd_prony =
      app.add_subcommand("prony", "Fit exponential-sum correlation models");
  add_common(cmd_prony, prony_args);

  CLI::App* cmd_estimate =
      app.add_subcommand("estimate", "Estimate the memory kernel and diagnostics");
  add_common(cmd_estimate, est_args);
  cmd_estimate->add_option("--loss", loss_flag, "Estimator selection: E, E1, E2 or all");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "Repeat estimation across a parameter grid");
  add_common(cmd_sweep, sweep_args);
  cmd_sweep->add_option("--axis", axis_flag,
                        "Sweep axis: omega, sigma_obs, ensemble_size, traj_length");
  cmd_sweep->add_option("--grid", grid_flag, "Sweep grid values (overrides the config)")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_simulate->parsed()) {
      const auto cfg = load_config(sim_args);
      const auto files = glekit::stage_simulate(cfg);
      std::cout << "simulate: wrote " << files.size() << " files to " << cfg.output_dir.string()
                << "\n";
    } else if (cmd_correlate->parsed()) {
      const auto cfg = load_config(corr_args);
      const auto path = glekit::stage_correlate(cfg);
      std::cout << "correlate: wrote " << path.string() << "\n";
    } else if (cmd_prony->parsed()) {
      const auto cfg = load_config(prony_args);
      const auto files = glekit::stage_prony(cfg);
      std::cout << "prony: wrote " << files.size() << " files to " << cfg.output_dir.string()
                << "\n";
    } else if (cmd_estimate->parsed()) {
      auto cfg = load_config(est_args);
      apply_loss_selection(cfg, loss_flag);
      const auto files = glekit::stage_estimate(cfg);
      std::cout << "estimate: wrote " << files.size() << " files to " << cfg.output_dir.string()
                << "\n";
    } else if (cmd_sweep->parsed()) {
      auto cfg = load_config(sweep_args);
      if (!axis_flag.empty() || !grid_flag.empty()) {
        glekit::SweepSpec spec = cfg.sweep.value_or(glekit::SweepSpec{});
        if (!axis_flag.empty()) spec.axis = axis_flag;
        if (!grid_flag.empty()) spec.grid = grid_flag;
        if (spec.trials < 1) spec.trials = 1;
        cfg.sweep = spec;
        cfg.validate();
      }
      const auto path = glekit::stage_sweep(cfg);
      std::cout << "sweep: wrote " << path.string() << "\n";
    }
  } catch (const glekit::validation_error& e) {
    std::cerr << "error (validation): " << e.what() << "\n";
    return 2;
  } catch (const glekit::numeric_error& e) {
    std::cerr << "error (numeric): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
