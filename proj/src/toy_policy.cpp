#include "avspo/toy_policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "avspo/error.hpp"

namespace avspo {

TabularPolicy::TabularPolicy(int num_questions, int seq_len, int vocab_size)
    : num_questions_(num_questions), seq_len_(seq_len), vocab_size_(vocab_size) {
  require(num_questions >= 1, "policy needs at least one question");
  require(vocab_size >= 2 && vocab_size <= kMaxVocabSize,
          "vocab_size must lie in [2, 16], got " + std::to_string(vocab_size));
  require(seq_len >= 1 && seq_len <= kMaxSeqLen,
          "seq_len must lie in [1, 4], got " + std::to_string(seq_len));
  std::size_t count = 1;
  for (int t = 0; t < seq_len; ++t) count *= static_cast<std::size_t>(vocab_size);
  require(count <= kMaxTrajectories, "trajectory space exceeds the enumeration cap of 65536");
  trajectory_count_ = count;
  logits_.assign(static_cast<std::size_t>(num_questions) * block_size(), 0.0);
}

std::span<const double> TabularPolicy::position_logits(int q, int t) const {
  return std::span<const double>(logits_).subspan(offset(q, t),
                                                  static_cast<std::size_t>(vocab_size_));
}

void TabularPolicy::set_position_logits(int q, int t, std::span<const double> values) {
  require(values.size() == static_cast<std::size_t>(vocab_size_), "logit vector has wrong size");
  std::copy(values.begin(), values.end(), logits_.begin() + static_cast<long>(offset(q, t)));
}

std::vector<double> TabularPolicy::position_probs(int q, int t) const {
  const auto z = position_logits(q, t);
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t v = 0; v < z.size(); ++v) {
    p[v] = std::exp(z[v] - m);
    sum += p[v];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::vector<double> TabularPolicy::question_probs(int q) const {
  std::vector<double> out;
  out.reserve(block_size());
  for (int t = 0; t < seq_len_; ++t) {
    const auto p = position_probs(q, t);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

double TabularPolicy::log_prob(int q, std::span<const int> tokens) const {
  double lp = 0.0;
  for (int t = 0; t < seq_len_; ++t) {
    const auto z = position_logits(q, t);
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double x : z) sum += std::exp(x - m);
    lp += z[static_cast<std::size_t>(tokens[t])] - m - std::log(sum);
  }
  return lp;
}

double TabularPolicy::prob(int q, std::span<const int> tokens) const {
  return std::exp(log_prob(q, tokens));
}

Tokens TabularPolicy::decode(std::size_t index) const {
  Tokens y(static_cast<std::size_t>(seq_len_));
  for (int t = seq_len_ - 1; t >= 0; --t) {
    y[static_cast<std::size_t>(t)] = static_cast<int>(index % static_cast<std::size_t>(vocab_size_));
    index /= static_cast<std::size_t>(vocab_size_);
  }
  return y;
}

std::size_t TabularPolicy::encode(std::span<const int> tokens) const {
  std::size_t index = 0;
  for (int t = 0; t < seq_len_; ++t) {
    index = index * static_cast<std::size_t>(vocab_size_) + static_cast<std::size_t>(tokens[t]);
  }
  return index;
}

void TabularPolicy::apply_step(std::span<const double> direction, double step) {
  require(direction.size() == logits_.size(), "update direction has wrong size");
  for (std::size_t i = 0; i < logits_.size(); ++i) logits_[i] += step * direction[i];
}

std::size_t Question::correct_count() const {
  return static_cast<std::size_t>(std::count_if(correct.begin(), correct.end(),
                                                [](std::uint8_t c) { return c != 0; }));
}

namespace {

void check_question(const TabularPolicy& policy, const Question& question) {
  require(question.id >= 0 && question.id < policy.num_questions(), "question id out of range");
  require(question.correct.size() == policy.trajectory_count(),
          "correct set size does not match the trajectory space");
}

// Probability of every trajectory of question q, in index order.
std::vector<double> trajectory_probs(const TabularPolicy& policy, int q) {
  const auto probs = policy.question_probs(q);
  const int t_len = policy.seq_len();
  const std::size_t v = static_cast<std::size_t>(policy.vocab_size());
  std::vector<double> out(policy.trajectory_count(), 1.0);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    std::size_t rest = idx;
    double p = 1.0;
    for (int t = t_len - 1; t >= 0; --t) {
      p *= probs[static_cast<std::size_t>(t) * v + rest % v];
      rest /= v;
    }
    out[idx] = p;
  }
  return out;
}

}  // namespace

SampledGroup sample_group(const TabularPolicy& policy, const Question& question, int group_size,
                          Stream& stream) {
  check_question(policy, question);
  require(group_size >= 2, "group size must be at least 2");
  const int q = question.id;
  const auto probs = policy.question_probs(q);
  const std::size_t v_size = static_cast<std::size_t>(policy.vocab_size());
  std::vector<Rollout> rollouts(static_cast<std::size_t>(group_size));
  std::vector<double> rewards(static_cast<std::size_t>(group_size));
  for (int i = 0; i < group_size; ++i) {
    Rollout& r = rollouts[static_cast<std::size_t>(i)];
    r.question_id = q;
    r.tokens.resize(static_cast<std::size_t>(policy.seq_len()));
    double lp = 0.0;
    for (int t = 0; t < policy.seq_len(); ++t) {
      const double* p = probs.data() + static_cast<std::size_t>(t) * v_size;
      const double u = stream.uniform();
      double cdf = 0.0;
      std::size_t pick = v_size - 1;
      for (std::size_t v = 0; v < v_size; ++v) {
        cdf += p[v];
        if (u < cdf) {
          pick = v;
          break;
        }
      }
      r.tokens[static_cast<std::size_t>(t)] = static_cast<int>(pick);
      lp += std::log(p[pick]);
    }
    r.logprob_old = lp;
    r.reward = question.accepts(policy.encode(r.tokens)) ? 1.0 : 0.0;
    rewards[static_cast<std::size_t>(i)] = r.reward;
  }
  return SampledGroup{std::move(rollouts), RewardGroup(std::move(rewards))};
}

SampledGroup sample_group(const TabularPolicy& policy, const Question& question, int group_size,
                          std::uint64_t seed) {
  Stream s(seed);
  return sample_group(policy, question, group_size, s);
}

double event_probability(const TabularPolicy& policy, int q,
                         std::span<const std::uint8_t> event_mask) {
  require(event_mask.size() == policy.trajectory_count(), "event mask has wrong size");
  const auto tp = trajectory_probs(policy, q);
  double z = 0.0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (event_mask[i]) z += tp[i];
  }
  return z;
}

double success_probability(const TabularPolicy& policy, const Question& question) {
  check_question(policy, question);
  return event_probability(policy, question.id, question.correct);
}

void add_score(const TabularPolicy& policy, int q, std::span<const int> tokens, double scale,
               std::span<double> out) {
  const std::size_t v_size = static_cast<std::size_t>(policy.vocab_size());
  for (int t = 0; t < policy.seq_len(); ++t) {
    const auto p = policy.position_probs(q, t);
    const std::size_t base = policy.offset(q, t);
    for (std::size_t v = 0; v < v_size; ++v) {
      const double ind = (static_cast<int>(v) == tokens[static_cast<std::size_t>(t)]) ? 1.0 : 0.0;
      out[base + v] += scale * (ind - p[v]);
    }
  }
}

ParamVector score_function(const TabularPolicy& policy, int q, std::span<const int> tokens) {
  require(tokens.size() == static_cast<std::size_t>(policy.seq_len()), "token count != seq_len");
  ParamVector g(policy.num_params(), 0.0);
  add_score(policy, q, tokens, 1.0, g);
  return g;
}

std::vector<std::uint8_t> event_mask(const Question& question, Event event) {
  std::vector<std::uint8_t> mask(question.correct.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool ok = question.correct[i] != 0;
    mask[i] = (event == Event::kSuccess) ? ok : !ok;
  }
  return mask;
}

ParamVector conditional_score(const TabularPolicy& policy, int q,
                              std::span<const std::uint8_t> event_mask) {
  require(event_mask.size() == policy.trajectory_count(), "event mask has wrong size");
  const auto tp = trajectory_probs(policy, q);
  double z = 0.0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (event_mask[i]) z += tp[i];
  }
  if (!(z > 0.0)) throw InvalidArgument("conditioning event has zero probability");
  ParamVector g(policy.num_params(), 0.0);
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (!event_mask[i]) continue;
    add_score(policy, q, policy.decode(i), tp[i] / z, g);
  }
  return g;
}

ParamVector conditional_score(const TabularPolicy& policy, const Question& question, Event event) {
  check_question(policy, question);
  return conditional_score(policy, question.id, event_mask(question, event));
}

ParamVector event_log_prob_gradient(const TabularPolicy& policy, int q,
                                    std::span<const std::uint8_t> event_mask) {
  require(event_mask.size() == policy.trajectory_count(), "event mask has wrong size");
  const auto tp = trajectory_probs(policy, q);
  const std::size_t v_size = static_cast<std::size_t>(policy.vocab_size());
  const int t_len = policy.seq_len();
  // joint[t][v] = P(E, y_t = v)
  std::vector<double> joint(policy.block_size(), 0.0);
  double z = 0.0;
  for (std::size_t idx = 0; idx < tp.size(); ++idx) {
    if (!event_mask[idx]) continue;
    z += tp[idx];
    std::size_t rest = idx;
    for (int t = t_len - 1; t >= 0; --t) {
      joint[static_cast<std::size_t>(t) * v_size + rest % v_size] += tp[idx];
      rest /= v_size;
    }
  }
  if (!(z > 0.0)) throw InvalidArgument("event has zero probability");
  ParamVector g(policy.num_params(), 0.0);
  const auto probs = policy.question_probs(q);
  const std::size_t base = policy.offset(q);
  for (std::size_t k = 0; k < joint.size(); ++k) g[base + k] = joint[k] / z - probs[k];
  return g;
}

ClippedTerm clipped_term(double rho, double advantage, double eps_clip) {
  const double lo = 1.0 - eps_clip;
  const double hi = 1.0 + eps_clip;
  const double clipped = std::clamp(rho, lo, hi);
  ClippedTerm out;
  out.value = std::min(rho * advantage, clipped * advantage);
  const bool gated = (advantage > 0.0 && rho >= hi) || (advantage < 0.0 && rho <= lo);
  out.d_value_d_rho = gated ? 0.0 : advantage;
  return out;
}

double accumulate_surrogate(const TabularPolicy& policy, const TabularPolicy& old_policy,
                            std::span<const Rollout> rollouts, std::span<const double> advantages,
                            double eps_clip, double scale, std::span<double> out,
                            std::size_t out_origin) {
  require(rollouts.size() == advantages.size(), "rollouts and advantages must align");
  require(!rollouts.empty(), "surrogate needs at least one rollout");
  require(eps_clip > 0.0 && eps_clip < 1.0, "eps_clip must lie in (0, 1)");
  const std::size_t v_size = static_cast<std::size_t>(policy.vocab_size());
  const int t_len = policy.seq_len();
  const double w = scale / (static_cast<double>(rollouts.size()) * static_cast<double>(t_len));
  double objective = 0.0;
  int cached_q = -1;
  std::vector<double> cur_probs;
  std::vector<double> old_probs;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    const Rollout& r = rollouts[i];
    const double a = advantages[i];
    if (r.question_id != cached_q) {
      cached_q = r.question_id;
      cur_probs = policy.question_probs(cached_q);
      old_probs = old_policy.question_probs(cached_q);
    }
    for (int t = 0; t < t_len; ++t) {
      const double* p_cur = cur_probs.data() + static_cast<std::size_t>(t) * v_size;
      const double* p_old = old_probs.data() + static_cast<std::size_t>(t) * v_size;
      const std::size_t y = static_cast<std::size_t>(r.tokens[static_cast<std::size_t>(t)]);
      const double rho = p_cur[y] / p_old[y];
      const ClippedTerm ct = clipped_term(rho, a, eps_clip);
      objective += w * ct.value;
      if (ct.d_value_d_rho == 0.0) continue;
      // d rho / d theta[t][v] = rho * (1[v = y] - p_cur[v])
      const double c = w * ct.d_value_d_rho * rho;
      const std::size_t base = policy.offset(r.question_id, t) - out_origin;
      for (std::size_t v = 0; v < v_size; ++v) {
        out[base + v] += c * ((v == y ? 1.0 : 0.0) - p_cur[v]);
      }
    }
  }
  return objective;
}

SurrogateGradient surrogate_gradient(const TabularPolicy& policy, const TabularPolicy& old_policy,
                                     std::span<const Rollout> rollouts,
                                     std::span<const double> advantages, double eps_clip) {
  require(policy.num_params() == old_policy.num_params(), "policy shapes differ");
  SurrogateGradient out;
  out.gradient.assign(policy.num_params(), 0.0);
  out.objective_value =
      accumulate_surrogate(policy, old_policy, rollouts, advantages, eps_clip, 1.0, out.gradient);
  for (double g : out.gradient) {
    if (!std::isfinite(g)) throw InvariantViolation("non-finite surrogate gradient");
  }
  return out;
}

UpdateDirection expected_update_direction(const TabularPolicy& policy, const Question& question,
                                          CollapseCase collapse_case, int k_count,
                                          const DirectionConfig& config) {
  check_question(policy, question);
  const double c = (collapse_case == CollapseCase::kAllCorrect) ? 1.0 : 0.0;
  const RewardGroup collapsed(std::vector<double>(static_cast<std::size_t>(config.group_size), c));
  const auto vs = stratified_virtual_rewards(collapsed, k_count, config.r_anchor);
  const auto aug = augment_and_recompute(collapsed, vs, config.eps_numeric);

  const Event event =
      (collapse_case == CollapseCase::kAllCorrect) ? Event::kSuccess : Event::kFailure;
  const auto mask = event_mask(question, event);

  UpdateDirection out;
  out.common_advantage = aug.advantages.front();
  // The G conditioned rollouts are i.i.d., so the expectation of the group
  // average equals the single-rollout conditional expectation.
  out.expected_gradient = conditional_score(policy, question.id, mask);
  for (double& g : out.expected_gradient) g *= out.common_advantage;
  out.reference_gradient = event_log_prob_gradient(policy, question.id, mask);
  for (double& g : out.reference_gradient) g *= out.common_advantage;
  return out;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace avspo
