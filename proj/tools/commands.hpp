#pragma once

// Subcommand implementations behind the avspo CLI. Each returns a process
// exit status and writes human-readable output to `out`/`err`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace avspo::cli {

/// Relative output paths resolve under $AVSPO_OUTPUT_DIR when it is set.
std::string resolve_output_path(const std::string& path);

struct SimulateOptions {
  std::string config_path;
  std::string env_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
};
int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);

struct DiagnoseOptions {
  std::string log_path;
  std::string out_path;  // empty: stdout only
  std::string csv_path;  // optional per-step CSV
  double tau = 1e-6;
  double alert_level = 0.5;
  // Default line fit to LLM math-reasoning runs; a domain-specific prior.
  double slope = -29.6;
  double intercept = 51.4;
};
int cmd_diagnose(const DiagnoseOptions& opt, std::ostream& out, std::ostream& err);

struct SweepOptions {
  std::string config_path;
  std::string env_path;
  std::string sweep_path;
  std::string out_dir;
  int jobs = 1;
  std::string group_by;  // optional sweep key for per-group fits
};
int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);

struct CompareOptions {
  std::string candidate_path;
  std::string baseline_path;
  std::string out_path;
};
int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace avspo::cli
