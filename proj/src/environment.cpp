#include "avspo/environment.hpp"

#include <cmath>
#include <random>

#include "avspo/error.hpp"

namespace avspo {

namespace {

CorrectRule parse_rule(const std::string& s) {
  if (s == "prefix") return CorrectRule::kPrefix;
  if (s == "exact") return CorrectRule::kExact;
  if (s == "random_subset") return CorrectRule::kRandomSubset;
  if (s == "none") return CorrectRule::kNone;
  if (s == "all") return CorrectRule::kAll;
  throw ParseError("key 'correct_rule': unknown rule '" + s +
                   "' (expected prefix|exact|random_subset|none|all)");
}

DifficultyDist parse_difficulty(const std::string& s) {
  if (s == "spread") return DifficultyDist::kSpread;
  if (s == "uniform") return DifficultyDist::kUniform;
  if (s == "logit_spread") return DifficultyDist::kLogitSpread;
  if (s == "fixed") return DifficultyDist::kFixed;
  if (s == "band") return DifficultyDist::kBand;
  throw ParseError("key 'difficulty': unknown distribution '" + s +
                   "' (expected spread|uniform|logit_spread|fixed|band)");
}

double logit(double p) { return std::log(p / (1.0 - p)); }

// Logit that gives token probability p against V-1 zero logits.
double calibrated_logit(double p, int vocab_size) {
  return std::log(p * static_cast<double>(vocab_size - 1) / (1.0 - p));
}

// Position within [0, 1] of question q among n evenly spaced points.
double spread_fraction(int q, int n) {
  return n == 1 ? 0.5 : static_cast<double>(q) / static_cast<double>(n - 1);
}

}  // namespace

void EnvSpec::validate() const {
  require(num_questions >= 1, "num_questions must be at least 1");
  require(vocab_size >= 2 && vocab_size <= kMaxVocabSize, "vocab_size must lie in [2, 16]");
  require(seq_len >= 1 && seq_len <= kMaxSeqLen, "seq_len must lie in [1, 4]");
  require(p_min > 0.0 && p_max < 1.0 && p_min <= p_max, "need 0 < p_min <= p_max < 1");
  require(p_fixed > 0.0 && p_fixed < 1.0, "p_fixed must lie in (0, 1)");
  require(num_bands >= 1, "num_bands must be at least 1");
  require(band >= 1 && band <= num_bands, "band must lie in [1, num_bands]");
  require(subset_fraction >= 0.0 && subset_fraction <= 1.0, "subset_fraction must lie in [0, 1]");
  require(logit_noise >= 0.0, "logit_noise must be non-negative");
}

EnvSpec env_spec_from_kv(const KvFile& kv) {
  kv.reject_unknown({"num_questions", "vocab_size", "seq_len", "correct_rule", "difficulty",
                     "p_min", "p_max", "p_fixed", "band", "num_bands", "subset_fraction",
                     "logit_noise", "seed"});
  EnvSpec s;
  s.num_questions = static_cast<int>(kv.get_long("num_questions", s.num_questions));
  s.vocab_size = static_cast<int>(kv.get_long("vocab_size", s.vocab_size));
  s.seq_len = static_cast<int>(kv.get_long("seq_len", s.seq_len));
  s.correct_rule = parse_rule(kv.get_string("correct_rule", "prefix"));
  s.difficulty = parse_difficulty(kv.get_string("difficulty", "spread"));
  s.p_min = kv.get_double("p_min", s.p_min);
  s.p_max = kv.get_double("p_max", s.p_max);
  s.p_fixed = kv.get_double("p_fixed", s.p_fixed);
  s.band = static_cast<int>(kv.get_long("band", s.band));
  s.num_bands = static_cast<int>(kv.get_long("num_bands", s.num_bands));
  s.subset_fraction = kv.get_double("subset_fraction", s.subset_fraction);
  s.logit_noise = kv.get_double("logit_noise", s.logit_noise);
  s.seed = kv.get_u64("seed", s.seed);
  s.validate();
  return s;
}

EnvSpec parse_env_spec(std::string_view text) {
  return env_spec_from_kv(KvFile::parse(text, "<env>"));
}

EnvSpec load_env_spec(const std::string& path) { return env_spec_from_kv(KvFile::load(path)); }

double target_success(const EnvSpec& spec, int q, Stream& stream) {
  const int n = spec.num_questions;
  switch (spec.difficulty) {
    case DifficultyDist::kSpread:
      return spec.p_min + (spec.p_max - spec.p_min) * spread_fraction(q, n);
    case DifficultyDist::kUniform:
      return spec.p_min + (spec.p_max - spec.p_min) * stream.uniform();
    case DifficultyDist::kLogitSpread: {
      const double lo = logit(spec.p_min);
      const double hi = logit(spec.p_max);
      const double z = lo + (hi - lo) * spread_fraction(q, n);
      return 1.0 / (1.0 + std::exp(-z));
    }
    case DifficultyDist::kFixed:
      return spec.p_fixed;
    case DifficultyDist::kBand: {
      const double width = (spec.p_max - spec.p_min) / static_cast<double>(spec.num_bands);
      const double lo = spec.p_min + width * static_cast<double>(spec.band - 1);
      return lo + width * spread_fraction(q, n);
    }
  }
  return spec.p_fixed;
}

Environment build_environment(const EnvSpec& spec) {
  spec.validate();
  Environment env{spec, {}, TabularPolicy(spec.num_questions, spec.seq_len, spec.vocab_size)};
  Stream stream = make_stream(spec.seed, 0, 0, StreamTag::kEnvironment);
  const std::size_t n_traj = env.initial_policy.trajectory_count();
  const int v_size = spec.vocab_size;
  env.questions.reserve(static_cast<std::size_t>(spec.num_questions));
  for (int q = 0; q < spec.num_questions; ++q) {
    Question question;
    question.id = q;
    question.correct.assign(n_traj, 0);
    switch (spec.correct_rule) {
      case CorrectRule::kPrefix: {
        const int target = static_cast<int>(stream.below(static_cast<std::uint64_t>(v_size)));
        const double p = target_success(spec, q, stream);
        for (std::size_t i = 0; i < n_traj; ++i) {
          question.correct[i] = env.initial_policy.decode(i)[0] == target;
        }
        std::vector<double> z(static_cast<std::size_t>(v_size), 0.0);
        z[static_cast<std::size_t>(target)] = calibrated_logit(p, v_size);
        env.initial_policy.set_position_logits(q, 0, z);
        question.difficulty_tag = "p0=" + std::to_string(p);
        break;
      }
      case CorrectRule::kExact: {
        const std::size_t target = static_cast<std::size_t>(stream.below(n_traj));
        const double p = target_success(spec, q, stream);
        question.correct[target] = 1;
        const Tokens y = env.initial_policy.decode(target);
        const double p_pos = std::pow(p, 1.0 / static_cast<double>(spec.seq_len));
        for (int t = 0; t < spec.seq_len; ++t) {
          std::vector<double> z(static_cast<std::size_t>(v_size), 0.0);
          z[static_cast<std::size_t>(y[static_cast<std::size_t>(t)])] =
              calibrated_logit(p_pos, v_size);
          env.initial_policy.set_position_logits(q, t, z);
        }
        question.difficulty_tag = "p0=" + std::to_string(p);
        break;
      }
      case CorrectRule::kRandomSubset:
        for (std::size_t i = 0; i < n_traj; ++i) {
          question.correct[i] = stream.uniform() < spec.subset_fraction;
        }
        question.difficulty_tag = "subset";
        break;
      case CorrectRule::kNone:
        question.difficulty_tag = "unsolvable";
        break;
      case CorrectRule::kAll:
        std::fill(question.correct.begin(), question.correct.end(), std::uint8_t{1});
        question.difficulty_tag = "trivial";
        break;
    }
    env.questions.push_back(std::move(question));
  }
  if (spec.logit_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.logit_noise);
    for (double& z : env.initial_policy.logits()) z += noise(stream.engine());
  }
  return env;
}

}  // namespace avspo
