#pragma once

// Statistics over groups of binary verifier rewards: mean, population
// standard deviation, group-normalized advantages, and batch-level collapse
// rates.

#include <cstddef>
#include <span>
#include <vector>

namespace avspo {

inline constexpr double kDefaultCollapseTau = 1e-6;
inline constexpr double kDefaultEpsNumeric = 1e-8;

/// One question's G sampled binary rewards. Construction validates G >= 2 and
/// that every reward is exactly 0.0 or 1.0.
class RewardGroup {
 public:
  explicit RewardGroup(std::vector<double> rewards);

  std::span<const double> rewards() const { return rewards_; }
  std::size_t size() const { return rewards_.size(); }
  double operator[](std::size_t i) const { return rewards_[i]; }

  bool all_zero() const;
  bool all_one() const;

 private:
  std::vector<double> rewards_;
};

struct GroupStats {
  double mean = 0.0;
  double std = 0.0;  // population (divisor G)
  bool is_collapsed = false;
};

using AdvantageVector = std::vector<double>;

/// N groups sharing one group size.
class Batch {
 public:
  explicit Batch(std::vector<RewardGroup> groups);

  std::span<const RewardGroup> groups() const { return groups_; }
  std::size_t size() const { return groups_.size(); }
  std::size_t group_size() const { return groups_.front().size(); }
  const RewardGroup& operator[](std::size_t j) const { return groups_[j]; }

 private:
  std::vector<RewardGroup> groups_;
};

struct CollapseBreakdown {
  double all_wrong_fraction = 0.0;
  double all_correct_fraction = 0.0;
};

/// Population mean and std of a real-valued sample. Shared by plain and
/// augmented groups so both use one convention.
GroupStats population_stats(std::span<const double> values, double tau);

GroupStats group_stats(const RewardGroup& group, double tau = kDefaultCollapseTau);

/// (r_i - mean) / (std + eps). Collapsed groups yield exact zeros.
AdvantageVector grpo_advantages(const RewardGroup& group, const GroupStats& stats,
                                double eps_numeric = kDefaultEpsNumeric);

double sum_squared_advantages(std::span<const double> adv);

/// Closed form G * std^2 / (std + eps)^2 for the sum of squared advantages.
double sum_squared_advantages_closed_form(std::size_t group_size, const GroupStats& stats,
                                          double eps_numeric);

/// Fraction of groups whose reward std is strictly below tau.
double compute_acr(const Batch& batch, double tau = kDefaultCollapseTau);

CollapseBreakdown collapse_breakdown(const Batch& batch, double tau = kDefaultCollapseTau);

}  // namespace avspo
