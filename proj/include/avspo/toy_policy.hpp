#pragma once

// Exactly enumerable stand-in for an LLM policy: per-question, per-position
// categorical distributions over a small vocabulary, a binary verifier given
// by a correct set, and the clipped token-level surrogate with its gradient.
//
// Trajectory y = (y_0, ..., y_{T-1}) is indexed in base V with y_0 as the most
// significant digit. pi(y|q) = prod_t softmax(theta[q][t])[y_t].

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avspo/reward_groups.hpp"
#include "avspo/rng.hpp"
#include "avspo/virtual_augmentation.hpp"

namespace avspo {

inline constexpr int kMaxVocabSize = 16;
inline constexpr int kMaxSeqLen = 4;
inline constexpr std::size_t kMaxTrajectories = 65536;

using Tokens = std::vector<int>;
using ParamVector = std::vector<double>;

class TabularPolicy {
 public:
  /// Zero logits (uniform policy). Rejects V > 16, T > 4, or V^T above the
  /// enumeration cap.
  TabularPolicy(int num_questions, int seq_len, int vocab_size);

  int num_questions() const { return num_questions_; }
  int seq_len() const { return seq_len_; }
  int vocab_size() const { return vocab_size_; }
  std::size_t num_params() const { return logits_.size(); }
  std::size_t block_size() const {
    return static_cast<std::size_t>(seq_len_) * static_cast<std::size_t>(vocab_size_);
  }
  std::size_t offset(int q, int t = 0) const {
    return static_cast<std::size_t>(q) * block_size() +
           static_cast<std::size_t>(t) * static_cast<std::size_t>(vocab_size_);
  }
  std::size_t trajectory_count() const { return trajectory_count_; }

  std::span<double> logits() { return logits_; }
  std::span<const double> logits() const { return logits_; }
  std::span<const double> position_logits(int q, int t) const;
  void set_position_logits(int q, int t, std::span<const double> values);

  /// Softmax over one position, computed with max subtraction.
  std::vector<double> position_probs(int q, int t) const;
  /// probs[t * V + v] for every position of question q.
  std::vector<double> question_probs(int q) const;

  double log_prob(int q, std::span<const int> tokens) const;
  double prob(int q, std::span<const int> tokens) const;

  Tokens decode(std::size_t index) const;
  std::size_t encode(std::span<const int> tokens) const;

  /// logits += step * direction
  void apply_step(std::span<const double> direction, double step);

 private:
  int num_questions_;
  int seq_len_;
  int vocab_size_;
  std::size_t trajectory_count_;
  std::vector<double> logits_;
};

/// A question and its verifier. correct[i] != 0 iff trajectory i is accepted.
/// An empty set (unsolvable) and a full set (trivial) are both legal.
struct Question {
  int id = 0;
  std::vector<std::uint8_t> correct;
  std::string difficulty_tag;

  bool accepts(std::size_t trajectory_index) const { return correct[trajectory_index] != 0; }
  std::size_t correct_count() const;
};

struct Rollout {
  int question_id = 0;
  Tokens tokens;
  double reward = 0.0;
  double logprob_old = 0.0;
};

struct SampledGroup {
  std::vector<Rollout> rollouts;
  RewardGroup rewards;
};

SampledGroup sample_group(const TabularPolicy& policy, const Question& question, int group_size,
                          Stream& stream);
SampledGroup sample_group(const TabularPolicy& policy, const Question& question, int group_size,
                          std::uint64_t seed);

/// Probability of an arbitrary trajectory set, by enumeration.
double event_probability(const TabularPolicy& policy, int q,
                         std::span<const std::uint8_t> event_mask);

double success_probability(const TabularPolicy& policy, const Question& question);

/// d log pi(y|q) / d theta as a full-size parameter vector. Entries outside
/// question q's block are zero.
ParamVector score_function(const TabularPolicy& policy, int q, std::span<const int> tokens);

/// Adds scale * score(y) into q's block of `out`.
void add_score(const TabularPolicy& policy, int q, std::span<const int> tokens, double scale,
               std::span<double> out);

enum class Event { kSuccess, kFailure };

std::vector<std::uint8_t> event_mask(const Question& question, Event event);

/// E[score(y) | y in E], averaging per-trajectory scores over the enumerated
/// event. Throws if the event has zero probability.
ParamVector conditional_score(const TabularPolicy& policy, int q,
                              std::span<const std::uint8_t> event_mask);
ParamVector conditional_score(const TabularPolicy& policy, const Question& question, Event event);

/// grad log pi(E|q) through the per-position marginals:
/// d/dtheta[t][v] = P(y_t = v | E) - softmax(theta[t])[v].
ParamVector event_log_prob_gradient(const TabularPolicy& policy, int q,
                                    std::span<const std::uint8_t> event_mask);

struct ClippedTerm {
  double value = 0.0;
  double d_value_d_rho = 0.0;
};

/// min(rho*A, clip(rho, 1-eps, 1+eps)*A) and its derivative in rho. The
/// derivative is exactly zero where clipping binds.
ClippedTerm clipped_term(double rho, double advantage, double eps_clip);

struct SurrogateGradient {
  ParamVector gradient;
  double objective_value = 0.0;
};

/// (1/G) sum_i (1/T) sum_t clipped(rho_t, A_i) for one group, and its gradient
/// with respect to the current policy's logits. rho_t is the per-position
/// probability ratio against old_policy.
SurrogateGradient surrogate_gradient(const TabularPolicy& policy, const TabularPolicy& old_policy,
                                     std::span<const Rollout> rollouts,
                                     std::span<const double> advantages, double eps_clip);

/// Same as surrogate_gradient, accumulating scale * gradient into `out` and
/// returning scale * objective. Parameter index i is written to
/// out[i - out_origin], so `out` may cover a single question block.
double accumulate_surrogate(const TabularPolicy& policy, const TabularPolicy& old_policy,
                            std::span<const Rollout> rollouts, std::span<const double> advantages,
                            double eps_clip, double scale, std::span<double> out,
                            std::size_t out_origin = 0);

struct DirectionConfig {
  int group_size = 8;
  double r_anchor = 0.1;
  double eps_numeric = kDefaultEpsNumeric;
};

struct UpdateDirection {
  ParamVector expected_gradient;
  ParamVector reference_gradient;
  double common_advantage = 0.0;
};

/// Expected unclipped on-policy group update conditioned on an all-correct or
/// all-wrong group, next to common_advantage * grad log P(event).
UpdateDirection expected_update_direction(const TabularPolicy& policy, const Question& question,
                                          CollapseCase collapse_case, int k_count,
                                          const DirectionConfig& config);

double l2_norm(std::span<const double> v);

}  // namespace avspo
