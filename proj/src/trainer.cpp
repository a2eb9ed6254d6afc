#include "avspo/trainer.hpp"

#include <cmath>
#include <string>

#include "avspo/error.hpp"

namespace avspo {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kGrpo: return "grpo";
    case Method::kAvspo: return "avspo";
    case Method::kFilterDrop: return "filter_drop";
  }
  return "avspo";
}

Method parse_method(std::string_view text) {
  if (text == "grpo") return Method::kGrpo;
  if (text == "avspo") return Method::kAvspo;
  if (text == "filter_drop") return Method::kFilterDrop;
  throw InvalidArgument("unknown method '" + std::string(text) +
                        "' (expected grpo|avspo|filter_drop)");
}

void TrainConfig::validate() const {
  require(group_size >= 2, "group_size must be at least 2");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(iterations >= 0, "iterations must be non-negative");
  require(eta_theta >= 0.0, "eta_theta must be non-negative");
  require(eps_clip > 0.0 && eps_clip < 1.0, "eps_clip must lie in (0, 1)");
  require(inner_epochs >= 1, "inner_epochs must be at least 1");
  require(collapse_tau > 0.0, "collapse_tau must be positive");
  require(eps_numeric > 0.0, "eps_numeric must be positive");
  augmentation.validate();
  controller.validate();
}

BiasMonitor bias_monitor(const TabularPolicy& policy, std::span<const SampledGroup> groups,
                         std::span<const AdvantageVector> method_advantages,
                         std::span<const AdvantageVector> grpo_advantages, double acr,
                         int k_count) {
  require(groups.size() == method_advantages.size() && groups.size() == grpo_advantages.size(),
          "bias monitor inputs must align");
  require(!groups.empty(), "bias monitor needs a non-empty batch");
  const double n = static_cast<double>(groups.size());
  ParamVector g_method(policy.num_params(), 0.0);
  ParamVector g_grpo(policy.num_params(), 0.0);
  BiasMonitor out;
  int group_size = 0;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const auto& rollouts = groups[j].rollouts;
    group_size = static_cast<int>(rollouts.size());
    const double w = 1.0 / (n * static_cast<double>(rollouts.size()));
    for (std::size_t i = 0; i < rollouts.size(); ++i) {
      const auto& r = rollouts[i];
      const auto score = score_function(policy, r.question_id, r.tokens);
      out.score_bound = std::max(out.score_bound, l2_norm(score));
      add_score(policy, r.question_id, r.tokens, w * method_advantages[j][i], g_method);
      add_score(policy, r.question_id, r.tokens, w * grpo_advantages[j][i], g_grpo);
    }
  }
  double ss = 0.0;
  for (std::size_t k = 0; k < g_method.size(); ++k) {
    const double d = g_method[k] - g_grpo[k];
    ss += d * d;
  }
  out.discrepancy = std::sqrt(ss);
  out.bound = out.score_bound * std::sqrt(static_cast<double>(k_count) / group_size) * acr;
  return out;
}

double sample_utilization(std::span<const AdvantageVector> final_advantages,
                          std::span<const char> included) {
  require(final_advantages.size() == included.size(), "utilization inputs must align");
  std::size_t total = 0;
  std::size_t active = 0;
  for (std::size_t j = 0; j < final_advantages.size(); ++j) {
    total += final_advantages[j].size();
    if (!included[j]) continue;
    for (double a : final_advantages[j]) {
      if (a != 0.0) ++active;
    }
  }
  require(total > 0, "utilization of an empty batch is undefined");
  return static_cast<double>(active) / static_cast<double>(total);
}

Trainer::Trainer(TrainConfig config, Environment env)
    : config_(config),
      env_(std::move(env)),
      policy_(env_.initial_policy),
      controller_(ControllerState::initial(config.controller)) {
  config_.validate();
  require(config_.batch_size <= env_.spec.num_questions,
          "batch_size (" + std::to_string(config_.batch_size) + ") exceeds num_questions (" +
              std::to_string(env_.spec.num_questions) + ")");
}

StepRecord Trainer::step(StepDetail* detail) {
  ++iteration_;
  const auto iter = static_cast<std::uint64_t>(iteration_);
  const Execution exec = config_.execution;

  // Stage 1: sample and measure collapse.
  const auto ids = select_batch(env_.spec.num_questions, config_.batch_size, config_.seed, iter);
  auto groups = sample_batch(policy_, env_.questions, ids, config_.group_size, config_.seed, iter,
                             exec);
  std::vector<RewardGroup> reward_groups;
  reward_groups.reserve(groups.size());
  for (const auto& g : groups) reward_groups.push_back(g.rewards);
  const Batch batch(std::move(reward_groups));

  StepRecord rec;
  rec.iteration = iteration_;
  rec.acr = compute_acr(batch, config_.collapse_tau);
  const auto breakdown = collapse_breakdown(batch, config_.collapse_tau);
  rec.all_wrong_frac = breakdown.all_wrong_fraction;
  rec.all_correct_frac = breakdown.all_correct_fraction;
  rec.return_hat = estimate_return(batch);
  rec.tau_adapt = controller_.tau_adapt;

  // Stage 2: advantages per method. GRPO advantages are always computed as
  // the shadow reference for the bias monitor.
  std::vector<AdvantageVector> grpo(batch.size());
  std::vector<char> collapsed(batch.size(), 0);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto s = group_stats(batch[j], config_.collapse_tau);
    collapsed[j] = s.is_collapsed;
    grpo[j] = grpo_advantages(batch[j], s, config_.eps_numeric);
  }
  std::vector<AdvantageVector> final_adv = grpo;
  std::vector<char> included(batch.size(), 1);
  std::vector<bool> augmented(batch.size(), false);
  switch (config_.method) {
    case Method::kGrpo:
      break;
    case Method::kAvspo: {
      const auto res = apply_augmentation_policy(batch, rec.acr, controller_.tau_adapt,
                                                 config_.augmentation, config_.eps_numeric,
                                                 config_.collapse_tau);
      for (std::size_t j = 0; j < batch.size(); ++j) {
        final_adv[j] = res.groups[j].advantages;
        augmented[j] = res.groups[j].augmented();
      }
      rec.k_used = res.k_used;
      break;
    }
    case Method::kFilterDrop:
      for (std::size_t j = 0; j < batch.size(); ++j) included[j] = !collapsed[j];
      break;
  }

  // Stage 3: ascend the clipped surrogate against the frozen sampling policy.
  const TabularPolicy old_policy = policy_;
  std::size_t n_objective = 0;
  for (char c : included) n_objective += c ? 1 : 0;
  ParamVector first_gradient;
  for (int epoch = 0; epoch < config_.inner_epochs; ++epoch) {
    ParamVector grad(policy_.num_params(), 0.0);
    if (n_objective > 0) {
      batch_surrogate_gradient(policy_, old_policy, groups, final_adv, included, config_.eps_clip,
                               1.0 / static_cast<double>(n_objective), grad, exec);
    }
    for (double g : grad) {
      if (!std::isfinite(g)) {
        throw InvariantViolation("non-finite gradient at iteration " + std::to_string(iteration_));
      }
    }
    if (epoch == 0) {
      rec.gradient_norm = l2_norm(grad);
      first_gradient = grad;
    }
    policy_.apply_step(grad, config_.eta_theta);
  }

  BiasMonitor bias;
  if (config_.method != Method::kFilterDrop) {
    const int k = rec.k_used.value_or(
        num_virtual_samples(rec.acr, config_.group_size, config_.augmentation.alpha));
    bias = bias_monitor(old_policy, groups, final_adv, grpo, rec.acr, k);
    rec.bias_bound = bias.bound;
    rec.bias_discrepancy = bias.discrepancy;
  }
  rec.utilization = sample_utilization(final_adv, included);

  controller_ = update_threshold(controller_, rec.acr, rec.return_hat).first;
  rec.mean_success_prob = mean_success_probability(policy_, env_.questions, exec);

  if (detail != nullptr) {
    detail->question_ids = ids;
    detail->groups = std::move(groups);
    detail->grpo_advantages = std::move(grpo);
    detail->final_advantages = std::move(final_adv);
    detail->included = std::move(included);
    detail->augmented = std::move(augmented);
    detail->first_gradient = std::move(first_gradient);
    detail->policy_before = old_policy;
    detail->bias = bias;
  }
  return rec;
}

std::vector<StepRecord> train(const TrainConfig& config, const Environment& env,
                              const std::function<void(const StepRecord&)>& on_step) {
  Trainer trainer(config, env);
  std::vector<StepRecord> out;
  out.reserve(static_cast<std::size_t>(config.iterations));
  for (int i = 0; i < config.iterations; ++i) {
    out.push_back(trainer.step());
    if (on_step) on_step(out.back());
  }
  return out;
}

}  // namespace avspo
