#include "avspo/virtual_augmentation.hpp"

#include <cmath>
#include <string>

#include "avspo/error.hpp"

namespace avspo {

std::string_view to_string(AugmentationMode mode) {
  switch (mode) {
    case AugmentationMode::kFull: return "full";
    case AugmentationMode::kErrorOnly: return "error_only";
    case AugmentationMode::kCorrectOnly: return "correct_only";
    case AugmentationMode::kOff: return "off";
  }
  return "full";
}

AugmentationMode parse_augmentation_mode(std::string_view text) {
  if (text == "full") return AugmentationMode::kFull;
  if (text == "error_only") return AugmentationMode::kErrorOnly;
  if (text == "correct_only") return AugmentationMode::kCorrectOnly;
  if (text == "off") return AugmentationMode::kOff;
  throw InvalidArgument("unknown augmentation mode '" + std::string(text) +
                        "' (expected full|error_only|correct_only|off)");
}

void AugmentationConfig::validate() const {
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1], got " + std::to_string(alpha));
  require(r_anchor > 0.0 && r_anchor < 1.0,
          "r_anchor must lie in (0, 1), got " + std::to_string(r_anchor));
}

int num_virtual_samples(double acr, int group_size, double alpha) {
  require(acr >= 0.0 && acr <= 1.0, "acr must lie in [0, 1], got " + std::to_string(acr));
  require(group_size >= 2, "group size must be at least 2");
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  const double raw = std::ceil(static_cast<double>(group_size) * std::pow(acr, alpha));
  const int k = static_cast<int>(raw);
  return std::max(1, std::min(group_size, k));
}

VirtualSampleSet stratified_virtual_rewards(const RewardGroup& group, int k_count,
                                            double r_anchor, double tau) {
  const int g = static_cast<int>(group.size());
  require(k_count >= 1 && k_count <= g,
          "K must lie in [1, G], got K=" + std::to_string(k_count) + " G=" + std::to_string(g));
  require(r_anchor > 0.0 && r_anchor < 1.0, "r_anchor must lie in (0, 1)");
  if (!group_stats(group, tau).is_collapsed) {
    throw InvalidArgument("virtual samples requested for a non-collapsed group");
  }
  VirtualSampleSet vs;
  vs.values.resize(static_cast<std::size_t>(k_count));
  const double k_total = static_cast<double>(k_count);
  if (group.all_one()) {
    vs.collapse_case = CollapseCase::kAllCorrect;
    for (int k = 1; k <= k_count; ++k) {
      vs.values[k - 1] = 1.0 * (1.0 - static_cast<double>(k) / (k_total + 1.0));
    }
  } else {
    vs.collapse_case = CollapseCase::kAllWrong;
    for (int k = 1; k <= k_count; ++k) {
      vs.values[k - 1] = r_anchor * (k_total - static_cast<double>(k) + 1.0) / k_total;
    }
  }
  return vs;
}

AugmentedGroup augment_and_recompute(const RewardGroup& group, const VirtualSampleSet& vs,
                                     double eps_numeric) {
  require(eps_numeric > 0.0, "eps_numeric must be positive");
  require(vs.count() >= 1 && vs.count() <= static_cast<int>(group.size()),
          "virtual sample count must lie in [1, G]");
  AugmentedGroup out;
  out.real_rewards.assign(group.rewards().begin(), group.rewards().end());
  std::vector<double> pooled = out.real_rewards;
  pooled.insert(pooled.end(), vs.values.begin(), vs.values.end());
  // tau only decides is_collapsed, which is unused here.
  const GroupStats s = population_stats(pooled, kDefaultCollapseTau);
  if (!(s.std > 0.0)) {
    throw InvariantViolation("augmented group has zero standard deviation");
  }
  out.aug_mean = s.mean;
  out.aug_std = s.std;
  out.advantages.resize(group.size());
  const double denom = s.std + eps_numeric;
  for (std::size_t i = 0; i < group.size(); ++i) {
    out.advantages[i] = (group[i] - s.mean) / denom;
  }
  out.virtual_samples = vs;
  return out;
}

AugmentedGroup passthrough_group(const RewardGroup& group, double tau, double eps_numeric) {
  const GroupStats s = group_stats(group, tau);
  AugmentedGroup out;
  out.real_rewards.assign(group.rewards().begin(), group.rewards().end());
  out.aug_mean = s.mean;
  out.aug_std = s.std;
  out.advantages = grpo_advantages(group, s, eps_numeric);
  return out;
}

CollapsedClosedForms collapsed_closed_forms(CollapseCase collapse_case, int group_size,
                                            int k_count, double r_anchor) {
  require(group_size >= 2, "group size must be at least 2");
  require(k_count >= 1 && k_count <= group_size, "K must lie in [1, G]");
  const double g = group_size;
  const double k = k_count;
  CollapsedClosedForms f;
  if (collapse_case == CollapseCase::kAllCorrect) {
    f.mean = (g + k / 2.0) / (g + k);
    f.std_lower_bound = std::sqrt(g * k) / (2.0 * (g + k));
  } else {
    f.mean = r_anchor * (k + 1.0) / (2.0 * (g + k));
    f.std_lower_bound = f.mean * std::sqrt(g / k);
  }
  f.advantage_bound = std::sqrt(k / g);
  return f;
}

namespace {

bool mode_permits(AugmentationMode mode, const RewardGroup& group) {
  switch (mode) {
    case AugmentationMode::kFull: return true;
    case AugmentationMode::kErrorOnly: return group.all_zero();
    case AugmentationMode::kCorrectOnly: return group.all_one();
    case AugmentationMode::kOff: return false;
  }
  return false;
}

}  // namespace

AugmentationResult apply_augmentation_policy(const Batch& batch, double acr, double tau_adapt,
                                             const AugmentationConfig& config,
                                             double eps_numeric, double tau) {
  config.validate();
  AugmentationResult result;
  result.groups.reserve(batch.size());
  result.triggered = acr > tau_adapt;
  const int g = static_cast<int>(batch.group_size());
  const int k = num_virtual_samples(acr, g, config.alpha);
  for (const auto& group : batch.groups()) {
    const GroupStats s = group_stats(group, tau);
    if (result.triggered && s.is_collapsed && mode_permits(config.mode, group)) {
      const auto vs = stratified_virtual_rewards(group, k, config.r_anchor, tau);
      result.groups.push_back(augment_and_recompute(group, vs, eps_numeric));
      ++result.augmented_count;
    } else {
      result.groups.push_back(passthrough_group(group, tau, eps_numeric));
    }
  }
  if (result.augmented_count > 0) result.k_used = k;
  return result;
}

}  // namespace avspo
