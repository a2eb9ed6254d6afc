#pragma once

// The training loop over the toy environment: sample a batch of groups,
// measure collapse, build advantages per method, ascend the clipped
// surrogate, and adapt the trigger threshold.

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "avspo/adaptive_controller.hpp"
#include "avspo/environment.hpp"
#include "avspo/kernels.hpp"
#include "avspo/virtual_augmentation.hpp"

namespace avspo {

enum class Method { kGrpo, kAvspo, kFilterDrop };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

struct TrainConfig {
  Method method = Method::kAvspo;
  int group_size = 8;
  int batch_size = 8;
  int iterations = 500;
  double eta_theta = 1e-2;
  double eps_clip = 0.2;
  int inner_epochs = 1;
  AugmentationConfig augmentation;
  ControllerConfig controller;
  double collapse_tau = kDefaultCollapseTau;
  double eps_numeric = kDefaultEpsNumeric;
  std::uint64_t seed = 0;
  Execution execution = Execution::kParallel;

  void validate() const;
};

/// One iteration's diagnostic snapshot. Optional fields serialize as null.
struct StepRecord {
  long iteration = 0;  // 1-based
  double acr = 0.0;
  double all_wrong_frac = 0.0;
  double all_correct_frac = 0.0;
  std::optional<int> k_used;
  double tau_adapt = 0.0;  // threshold the trigger compared against
  double return_hat = 0.0;
  std::optional<double> mean_success_prob;  // after the update
  std::optional<double> gradient_norm;      // first inner epoch
  std::optional<double> bias_bound;
  std::optional<double> bias_discrepancy;
  double utilization = 0.0;

  bool operator==(const StepRecord&) const = default;
};

struct BiasMonitor {
  double discrepancy = 0.0;  // ||g_method - g_grpo||
  double bound = 0.0;        // B * sqrt(K/G) * ACR
  double score_bound = 0.0;  // B: max score norm over the batch
};

/// Shadow comparison of two unclipped on-policy estimators
/// (1/N) sum_j (1/G) sum_i A_ij grad log pi(y_ij | q_j), one with the method's
/// advantages and one with plain GRPO advantages.
BiasMonitor bias_monitor(const TabularPolicy& policy, std::span<const SampledGroup> groups,
                         std::span<const AdvantageVector> method_advantages,
                         std::span<const AdvantageVector> grpo_advantages, double acr,
                         int k_count);

/// Fraction of the batch's rollouts whose advantage in the final objective is
/// nonzero. Excluded groups count as zero.
double sample_utilization(std::span<const AdvantageVector> final_advantages,
                          std::span<const char> included);

/// Internals of one step, exposed for tests and the acceptance suite.
struct StepDetail {
  std::vector<int> question_ids;
  std::vector<SampledGroup> groups;
  std::vector<AdvantageVector> grpo_advantages;
  std::vector<AdvantageVector> final_advantages;
  std::vector<char> included;
  std::vector<bool> augmented;
  ParamVector first_gradient;
  std::optional<TabularPolicy> policy_before;
  BiasMonitor bias;
};

class Trainer {
 public:
  Trainer(TrainConfig config, Environment env);

  StepRecord step(StepDetail* detail = nullptr);

  const TrainConfig& config() const { return config_; }
  const Environment& environment() const { return env_; }
  const TabularPolicy& policy() const { return policy_; }
  const ControllerState& controller() const { return controller_; }
  long iteration() const { return iteration_; }

 private:
  TrainConfig config_;
  Environment env_;
  TabularPolicy policy_;
  ControllerState controller_;
  long iteration_ = 0;
};

/// Runs config.iterations steps. on_step, when set, sees each record as it is
/// produced (used to stream traces).
std::vector<StepRecord> train(const TrainConfig& config, const Environment& env,
                              const std::function<void(const StepRecord&)>& on_step = {});

}  // namespace avspo
