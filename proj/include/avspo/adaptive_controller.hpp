#pragma once

#include <optional>
#include <utility>

#include "avspo/reward_groups.hpp"

namespace avspo {

struct ControllerConfig {
  double tau_init = 0.5;
  double eta = 0.01;  // 0 gives a fixed threshold
  double tau_min = 0.1;
  double tau_max = 0.9;

  void validate() const;
};

/// Adaptive trigger threshold. Single-owner; updated once per iteration.
struct ControllerState {
  double tau_adapt = 0.5;
  std::optional<double> prev_return;
  long iteration = 0;
  ControllerConfig config;

  static ControllerState initial(const ControllerConfig& config);
};

struct ThresholdUpdateLog {
  std::optional<double> delta_j;
  int sign_used = 0;
  double tau_before = 0.0;
  double tau_after = 0.0;
};

/// Mean reward over every sample in the batch.
double estimate_return(const Batch& batch);

/// Sign-of-improvement threshold rule, clamped to [tau_min, tau_max]. The
/// first call only records the return.
std::pair<ControllerState, ThresholdUpdateLog> update_threshold(const ControllerState& state,
                                                                double acr,
                                                                double current_return);

inline bool should_trigger(const ControllerState& state, double acr) {
  return acr > state.tau_adapt;
}

}  // namespace avspo
