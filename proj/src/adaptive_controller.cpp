#include "avspo/adaptive_controller.hpp"

#include <algorithm>
#include <string>

#include "avspo/error.hpp"

namespace avspo {

void ControllerConfig::validate() const {
  require(tau_min <= tau_max, "tau_min must not exceed tau_max");
  require(tau_init >= tau_min && tau_init <= tau_max,
          "tau_init must lie within [tau_min, tau_max], got " + std::to_string(tau_init));
  require(eta >= 0.0, "threshold learning rate eta must be non-negative");
}

ControllerState ControllerState::initial(const ControllerConfig& config) {
  config.validate();
  ControllerState s;
  s.tau_adapt = config.tau_init;
  s.config = config;
  return s;
}

double estimate_return(const Batch& batch) {
  double sum = 0.0;
  for (const auto& g : batch.groups()) {
    for (double r : g.rewards()) sum += r;
  }
  return sum / (static_cast<double>(batch.size()) * static_cast<double>(batch.group_size()));
}

std::pair<ControllerState, ThresholdUpdateLog> update_threshold(const ControllerState& state,
                                                                double acr,
                                                                double current_return) {
  require(acr >= 0.0 && acr <= 1.0, "acr must lie in [0, 1]");
  require(current_return >= 0.0 && current_return <= 1.0, "return must lie in [0, 1]");
  ControllerState next = state;
  ThresholdUpdateLog log;
  log.tau_before = state.tau_adapt;
  if (state.prev_return) {
    const double delta = current_return - *state.prev_return;
    const int sign = (delta > 0.0) - (delta < 0.0);
    log.delta_j = delta;
    log.sign_used = sign;
    if (sign != 0) {
      const double moved =
          state.tau_adapt + state.config.eta * static_cast<double>(sign) * (acr - state.tau_adapt);
      next.tau_adapt = std::clamp(moved, state.config.tau_min, state.config.tau_max);
    }
  }
  next.prev_return = current_return;
  ++next.iteration;
  log.tau_after = next.tau_adapt;
  return {next, log};
}

}  // namespace avspo
