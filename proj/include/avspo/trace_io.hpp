#pragma once

// Line-delimited JSON formats.
//
// Trace file: a header line {"schema":"avspo-trace","version":1} followed by
// one StepRecord object per line. Field names: iteration, acr,
// all_wrong_frac, all_correct_frac, k_used, tau_adapt, return_hat,
// mean_success_prob, gradient_norm, bias_bound, bias_discrepancy,
// utilization. Nullable fields are written as null. Readers ignore unknown
// fields.
//
// Reward log: optional header {"schema":"avspo-rewards","version":1}, then
// one {"step": n, "group_rewards": [[0,1,...], ...]} object per line. Every
// inner list on a line has the same length; rewards are 0 or 1.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "avspo/trainer.hpp"

namespace avspo {

inline constexpr int kTraceSchemaVersion = 1;
inline constexpr int kRewardLogSchemaVersion = 1;

std::string trace_header_line();
std::string serialize_step_record(const StepRecord& record);
StepRecord parse_step_record(std::string_view line);

/// Streams a trace: header on construction, one line per record.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& out);
  void write(const StepRecord& record);

 private:
  std::ostream& out_;
};

std::vector<StepRecord> read_trace(std::istream& in);
std::vector<StepRecord> read_trace_file(const std::string& path);

struct ExternalRewardLine {
  long step = 0;
  std::vector<std::vector<double>> group_rewards;
};

ExternalRewardLine parse_reward_line(std::string_view line);
std::vector<ExternalRewardLine> read_reward_log(std::istream& in);
std::string serialize_reward_line(const ExternalRewardLine& line);
std::string reward_log_header_line();

/// Validates binary rewards and a shared G, then builds the batch.
Batch to_batch(const ExternalRewardLine& line);

}  // namespace avspo
