#include "avspo/reward_groups.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avspo/error.hpp"

namespace avspo {

RewardGroup::RewardGroup(std::vector<double> rewards) : rewards_(std::move(rewards)) {
  require(rewards_.size() >= 2,
          "reward group needs at least 2 samples, got " + std::to_string(rewards_.size()));
  for (std::size_t i = 0; i < rewards_.size(); ++i) {
    const double r = rewards_[i];
    require(r == 0.0 || r == 1.0,
            "reward " + std::to_string(i) + " is not binary: " + std::to_string(r));
  }
}

bool RewardGroup::all_zero() const {
  return std::all_of(rewards_.begin(), rewards_.end(), [](double r) { return r == 0.0; });
}

bool RewardGroup::all_one() const {
  return std::all_of(rewards_.begin(), rewards_.end(), [](double r) { return r == 1.0; });
}

Batch::Batch(std::vector<RewardGroup> groups) : groups_(std::move(groups)) {
  require(!groups_.empty(), "batch must contain at least one group");
  const std::size_t g = groups_.front().size();
  for (const auto& grp : groups_) {
    require(grp.size() == g, "all groups in a batch must share one group size");
  }
}

GroupStats population_stats(std::span<const double> values, double tau) {
  require(!values.empty(), "cannot take stats of an empty sample");
  require(tau > 0.0, "collapse threshold tau must be positive");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  GroupStats s;
  s.mean = mean;
  s.std = std::sqrt(ss / n);
  s.is_collapsed = s.std < tau;
  return s;
}

GroupStats group_stats(const RewardGroup& group, double tau) {
  return population_stats(group.rewards(), tau);
}

AdvantageVector grpo_advantages(const RewardGroup& group, const GroupStats& stats,
                                double eps_numeric) {
  require(eps_numeric > 0.0, "eps_numeric must be positive");
  AdvantageVector adv(group.size(), 0.0);
  const double denom = stats.std + eps_numeric;
  for (std::size_t i = 0; i < group.size(); ++i) adv[i] = (group[i] - stats.mean) / denom;
  return adv;
}

double sum_squared_advantages(std::span<const double> adv) {
  double s = 0.0;
  for (double a : adv) s += a * a;
  return s;
}

double sum_squared_advantages_closed_form(std::size_t group_size, const GroupStats& stats,
                                          double eps_numeric) {
  const double d = stats.std + eps_numeric;
  return static_cast<double>(group_size) * stats.std * stats.std / (d * d);
}

double compute_acr(const Batch& batch, double tau) {
  std::size_t collapsed = 0;
  for (const auto& g : batch.groups()) {
    if (group_stats(g, tau).is_collapsed) ++collapsed;
  }
  return static_cast<double>(collapsed) / static_cast<double>(batch.size());
}

CollapseBreakdown collapse_breakdown(const Batch& batch, double tau) {
  std::size_t wrong = 0;
  std::size_t correct = 0;
  for (const auto& g : batch.groups()) {
    if (!group_stats(g, tau).is_collapsed) continue;
    // Binary rewards: a collapsed group is homogeneous, so its first reward
    // identifies the case.
    if (g[0] == 0.0) {
      ++wrong;
    } else {
      ++correct;
    }
  }
  const double n = static_cast<double>(batch.size());
  return {static_cast<double>(wrong) / n, static_cast<double>(correct) / n};
}

}  // namespace avspo
