#include "avspo/trace_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "avspo/error.hpp"

namespace avspo {

using ojson = nlohmann::ordered_json;
using nlohmann::json;

namespace {

template <typename T>
ojson nullable(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

double required_double(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ParseError(std::string("trace record: missing or non-numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

std::optional<double> optional_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_number()) {
    throw ParseError(std::string("trace record: field '") + key + "' is not a number");
  }
  return j.at(key).get<double>();
}

bool is_header(const json& j) { return j.is_object() && j.contains("schema"); }

void check_header(const json& j, std::string_view schema, int version) {
  if (j.at("schema") != schema) {
    throw ParseError("unexpected schema '" + j.at("schema").dump() + "', expected '" +
                     std::string(schema) + "'");
  }
  if (!j.contains("version") || j.at("version") != version) {
    throw ParseError("unsupported " + std::string(schema) + " version");
  }
}

json parse_json_line(std::string_view line, const std::string& where) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(where + ": malformed JSON: " + e.what());
  }
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

}  // namespace

std::string trace_header_line() {
  ojson h;
  h["schema"] = "avspo-trace";
  h["version"] = kTraceSchemaVersion;
  return h.dump();
}

std::string serialize_step_record(const StepRecord& r) {
  ojson j;
  j["iteration"] = r.iteration;
  j["acr"] = r.acr;
  j["all_wrong_frac"] = r.all_wrong_frac;
  j["all_correct_frac"] = r.all_correct_frac;
  j["k_used"] = nullable(r.k_used);
  j["tau_adapt"] = r.tau_adapt;
  j["return_hat"] = r.return_hat;
  j["mean_success_prob"] = nullable(r.mean_success_prob);
  j["gradient_norm"] = nullable(r.gradient_norm);
  j["bias_bound"] = nullable(r.bias_bound);
  j["bias_discrepancy"] = nullable(r.bias_discrepancy);
  j["utilization"] = r.utilization;
  return j.dump();
}

StepRecord parse_step_record(std::string_view line) {
  const json j = parse_json_line(line, "trace record");
  if (!j.is_object()) throw ParseError("trace record is not a JSON object");
  StepRecord r;
  if (!j.contains("iteration") || !j.at("iteration").is_number_integer()) {
    throw ParseError("trace record: missing or non-integer field 'iteration'");
  }
  r.iteration = j.at("iteration").get<long>();
  r.acr = required_double(j, "acr");
  r.all_wrong_frac = required_double(j, "all_wrong_frac");
  r.all_correct_frac = required_double(j, "all_correct_frac");
  if (j.contains("k_used") && !j.at("k_used").is_null()) {
    if (!j.at("k_used").is_number_integer()) {
      throw ParseError("trace record: field 'k_used' is not an integer");
    }
    r.k_used = j.at("k_used").get<int>();
  }
  r.tau_adapt = required_double(j, "tau_adapt");
  r.return_hat = required_double(j, "return_hat");
  r.mean_success_prob = optional_double(j, "mean_success_prob");
  r.gradient_norm = optional_double(j, "gradient_norm");
  r.bias_bound = optional_double(j, "bias_bound");
  r.bias_discrepancy = optional_double(j, "bias_discrepancy");
  r.utilization = required_double(j, "utilization");
  return r;
}

TraceWriter::TraceWriter(std::ostream& out) : out_(out) { out_ << trace_header_line() << '\n'; }

void TraceWriter::write(const StepRecord& record) {
  out_ << serialize_step_record(record) << '\n';
}

std::vector<StepRecord> read_trace(std::istream& in) {
  std::vector<StepRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const json j = parse_json_line(line, "trace line " + std::to_string(line_no));
    if (is_header(j)) {
      check_header(j, "avspo-trace", kTraceSchemaVersion);
      continue;
    }
    try {
      out.push_back(parse_step_record(line));
    } catch (const ParseError& e) {
      throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<StepRecord> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace '" + path + "'");
  return read_trace(in);
}

std::string reward_log_header_line() {
  ojson h;
  h["schema"] = "avspo-rewards";
  h["version"] = kRewardLogSchemaVersion;
  return h.dump();
}

ExternalRewardLine parse_reward_line(std::string_view line) {
  const json j = parse_json_line(line, "reward line");
  if (!j.is_object() || !j.contains("step") || !j.at("step").is_number_integer()) {
    throw ParseError("reward line: missing integer field 'step'");
  }
  if (!j.contains("group_rewards") || !j.at("group_rewards").is_array()) {
    throw ParseError("reward line: missing array field 'group_rewards'");
  }
  ExternalRewardLine out;
  out.step = j.at("step").get<long>();
  for (const auto& g : j.at("group_rewards")) {
    if (!g.is_array()) throw ParseError("reward line: each group must be an array");
    std::vector<double> rewards;
    for (const auto& r : g) {
      if (!r.is_number()) throw ParseError("reward line: non-numeric reward");
      rewards.push_back(r.get<double>());
    }
    out.group_rewards.push_back(std::move(rewards));
  }
  return out;
}

std::vector<ExternalRewardLine> read_reward_log(std::istream& in) {
  std::vector<ExternalRewardLine> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const std::string where = "reward log line " + std::to_string(line_no);
    const json j = parse_json_line(line, where);
    if (is_header(j)) {
      check_header(j, "avspo-rewards", kRewardLogSchemaVersion);
      continue;
    }
    try {
      out.push_back(parse_reward_line(line));
      to_batch(out.back());
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

std::string serialize_reward_line(const ExternalRewardLine& line) {
  ojson j;
  j["step"] = line.step;
  j["group_rewards"] = ojson::array();
  for (const auto& g : line.group_rewards) {
    ojson arr = ojson::array();
    for (double r : g) arr.push_back(static_cast<int>(r));
    j["group_rewards"].push_back(arr);
  }
  return j.dump();
}

Batch to_batch(const ExternalRewardLine& line) {
  if (line.group_rewards.empty()) throw InvalidArgument("step has no groups");
  const std::size_t g = line.group_rewards.front().size();
  std::vector<RewardGroup> groups;
  groups.reserve(line.group_rewards.size());
  for (std::size_t j = 0; j < line.group_rewards.size(); ++j) {
    if (line.group_rewards[j].size() != g) {
      throw InvalidArgument("ragged groups: group " + std::to_string(j) + " has " +
                            std::to_string(line.group_rewards[j].size()) + " rewards, expected " +
                            std::to_string(g));
    }
    groups.emplace_back(line.group_rewards[j]);
  }
  return Batch(std::move(groups));
}

}  // namespace avspo
