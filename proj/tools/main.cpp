#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace avspo::cli;
  CLI::App app{"avspo: collapse-aware virtual-sample augmentation for group-relative policy optimization"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Train on a toy environment and stream a trace");
  simulate->add_option("--config", sim.config_path, "Training config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--env", sim.env_path, "Environment spec file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out_path, "Trace output (JSON lines)")->required();
  std::uint64_t seed = 0;
  auto* seed_opt = simulate->add_option("--seed", seed, "Override the run seed");

  DiagnoseOptions diag;
  auto* diagnose = app.add_subcommand("diagnose", "Report collapse statistics for an external reward log");
  diagnose->add_option("--log", diag.log_path, "Reward log (JSON lines)")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--out", diag.out_path, "Also write the report here");
  diagnose->add_option("--csv", diag.csv_path, "Write per-step ACR as CSV");
  diagnose->add_option("--tau", diag.tau, "Collapse threshold on group std")->capture_default_str();
  diagnose->add_option("--alert", diag.alert_level, "Alert when early ACR exceeds this")->capture_default_str();
  diagnose->add_option("--slope", diag.slope, "Regression slope for the outcome prior")->capture_default_str();
  diagnose->add_option("--intercept", diag.intercept, "Regression intercept for the outcome prior")->capture_default_str();

  SweepOptions sw;
  auto* sweep = app.add_subcommand("sweep", "Run a grid of configurations");
  sweep->add_option("--config", sw.config_path, "Base training config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--env", sw.env_path, "Base environment spec")->required()->check(CLI::ExistingFile);
  sweep->add_option("--sweep", sw.sweep_path, "Sweep spec: key = v1, v2, ...")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sw.out_dir, "Output directory")->required();
  sweep->add_option("--jobs", sw.jobs, "Cells run concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--group-by", sw.group_by, "Sweep key for per-group outcome fits");

  CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Compare a candidate trace against a baseline");
  compare->add_option("--candidate", cmp.candidate_path, "Candidate trace")->required()->check(CLI::ExistingFile);
  compare->add_option("--baseline", cmp.baseline_path, "Baseline trace")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", cmp.out_path, "Also write the report here");

  CLI11_PARSE(app, argc, argv);

  if (*simulate) {
    if (*seed_opt) sim.seed = seed;
    return cmd_simulate(sim, std::cout, std::cerr);
  }
  if (*diagnose) return cmd_diagnose(diag, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(sw, std::cout, std::cerr);
  return cmd_compare(cmp, std::cout, std::cerr);
}
