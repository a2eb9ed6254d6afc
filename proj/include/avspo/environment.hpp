#pragma once

// Environment description files and the questions/initial policy they
// describe.
//
// Schema (flat key = value, unknown keys rejected):
//   num_questions   int >= 1                          (default 16)
//   vocab_size      int in [2, 16]                    (default 4)
//   seq_len         int in [1, 4]                     (default 2)
//   correct_rule    prefix | exact | random_subset | none | all   (prefix)
//   difficulty      spread | uniform | logit_spread | fixed | band (spread)
//   p_min, p_max    target initial success range     (0.02, 0.98)
//   p_fixed         target for difficulty = fixed    (0.5)
//   band            1-based band index               (3)
//   num_bands       number of equal-width bands      (5)
//   subset_fraction inclusion rate for random_subset (0.25)
//   logit_noise     std-dev of Gaussian noise on all logits (0)
//   seed            environment construction seed    (0)

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "avspo/kv_file.hpp"
#include "avspo/toy_policy.hpp"

namespace avspo {

enum class CorrectRule { kPrefix, kExact, kRandomSubset, kNone, kAll };
enum class DifficultyDist { kSpread, kUniform, kLogitSpread, kFixed, kBand };

struct EnvSpec {
  int num_questions = 16;
  int vocab_size = 4;
  int seq_len = 2;
  CorrectRule correct_rule = CorrectRule::kPrefix;
  DifficultyDist difficulty = DifficultyDist::kSpread;
  double p_min = 0.02;
  double p_max = 0.98;
  double p_fixed = 0.5;
  int band = 3;
  int num_bands = 5;
  double subset_fraction = 0.25;
  double logit_noise = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

EnvSpec env_spec_from_kv(const KvFile& kv);
EnvSpec parse_env_spec(std::string_view text);
EnvSpec load_env_spec(const std::string& path);

struct Environment {
  EnvSpec spec;
  std::vector<Question> questions;
  TabularPolicy initial_policy;
};

/// Target initial success probability for question q under spec.difficulty
/// (ignored by random_subset/none/all).
double target_success(const EnvSpec& spec, int q, Stream& stream);

Environment build_environment(const EnvSpec& spec);

}  // namespace avspo
