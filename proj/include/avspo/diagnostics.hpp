#pragma once

// Post-hoc run analysis: early-window ACR, simple linear regression of an
// outcome on early ACR, and run-to-run comparison.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avspo/trainer.hpp"

namespace avspo {

inline constexpr std::size_t kEarlyWindow = 100;

/// Mean ACR over the first min(100, n) entries.
double acr_100(std::span<const double> acr_series);
double acr_100(std::span<const StepRecord> records);

struct RunSummary {
  double acr_100 = 0.0;
  std::optional<double> final_metric;
  double acr_mean = 0.0;
  std::optional<double> collapse_reduction;  // set by compare_runs
  std::size_t steps = 0;
  bool short_window = false;  // fewer than 100 steps available
};

RunSummary summarize_run(std::span<const StepRecord> records);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double pearson_r = 0.0;
  std::size_t n_points = 0;

  double predict(double x) const { return intercept + slope * x; }
};

/// Least-squares line y = intercept + slope * x. Needs >= 3 points and
/// non-degenerate x. A constant y gives slope 0 and R^2 = 0.
OlsFit ols_fit(std::span<const Point> points);

struct Comparison {
  std::optional<double> relative_reduction;  // 1 - a/b; absent when b's ACR is 0
  double absolute_acr_difference = 0.0;      // b - a
  std::optional<double> final_metric_delta;  // a - b
  std::string report;
};

/// Compares a candidate run `a` against a baseline run `b`.
Comparison compare_runs(const RunSummary& a, const RunSummary& b);

}  // namespace avspo
