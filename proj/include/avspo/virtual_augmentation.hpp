#pragma once

// Virtual reward samples for collapsed groups. Virtual values enter only the
// normalization statistics; advantages are produced for the real samples.

#include <optional>
#include <string_view>
#include <vector>

#include "avspo/reward_groups.hpp"

namespace avspo {

enum class CollapseCase { kAllCorrect, kAllWrong };

/// Which collapsed groups an augmentation pass may touch.
enum class AugmentationMode { kFull, kErrorOnly, kCorrectOnly, kOff };

std::string_view to_string(AugmentationMode mode);
AugmentationMode parse_augmentation_mode(std::string_view text);

struct AugmentationConfig {
  double alpha = 0.5;
  double r_anchor = 0.1;
  AugmentationMode mode = AugmentationMode::kFull;

  void validate() const;
};

struct VirtualSampleSet {
  std::vector<double> values;
  CollapseCase collapse_case = CollapseCase::kAllWrong;

  int count() const { return static_cast<int>(values.size()); }
};

struct AugmentedGroup {
  std::vector<double> real_rewards;
  std::optional<VirtualSampleSet> virtual_samples;
  double aug_mean = 0.0;
  double aug_std = 0.0;
  AdvantageVector advantages;  // one entry per real sample

  bool augmented() const { return virtual_samples.has_value(); }
};

/// K = max(1, min(G, ceil(G * acr^alpha))).
int num_virtual_samples(double acr, int group_size, double alpha);

/// Stratified virtual rewards for a collapsed group. Throws on a mixed group.
VirtualSampleSet stratified_virtual_rewards(const RewardGroup& group, int k_count,
                                            double r_anchor,
                                            double tau = kDefaultCollapseTau);

/// Pools real and virtual rewards, recomputes mean/std (divisor G+K), and
/// produces advantages for the G real samples.
AugmentedGroup augment_and_recompute(const RewardGroup& group, const VirtualSampleSet& vs,
                                     double eps_numeric = kDefaultEpsNumeric);

/// The unaugmented pass-through: plain GRPO statistics and advantages.
AugmentedGroup passthrough_group(const RewardGroup& group, double tau = kDefaultCollapseTau,
                                 double eps_numeric = kDefaultEpsNumeric);

struct CollapsedClosedForms {
  double mean = 0.0;
  double std_lower_bound = 0.0;
  double advantage_bound = 0.0;
};

/// Closed-form pooled mean, std lower bound, and sqrt(K/G) advantage bound for
/// a collapsed group with stratified virtual rewards.
CollapsedClosedForms collapsed_closed_forms(CollapseCase collapse_case, int group_size,
                                            int k_count, double r_anchor);

struct AugmentationResult {
  std::vector<AugmentedGroup> groups;
  bool triggered = false;           // acr > tau_adapt
  std::optional<int> k_used;        // set iff at least one group was augmented
  int augmented_count = 0;
};

/// Applies the conditional integration rule to a whole batch. K is derived
/// once from the batch ACR and shared by every augmented group.
AugmentationResult apply_augmentation_policy(const Batch& batch, double acr, double tau_adapt,
                                             const AugmentationConfig& config,
                                             double eps_numeric = kDefaultEpsNumeric,
                                             double tau = kDefaultCollapseTau);

}  // namespace avspo
