#include "avspo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "avspo/error.hpp"

namespace avspo {

double acr_100(std::span<const double> acr_series) {
  require(!acr_series.empty(), "acr_100 needs at least one step");
  const std::size_t n = std::min(kEarlyWindow, acr_series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += acr_series[i];
  return sum / static_cast<double>(n);
}

double acr_100(std::span<const StepRecord> records) {
  std::vector<double> series;
  series.reserve(records.size());
  for (const auto& r : records) series.push_back(r.acr);
  return acr_100(series);
}

RunSummary summarize_run(std::span<const StepRecord> records) {
  require(!records.empty(), "cannot summarize an empty run");
  RunSummary s;
  s.acr_100 = acr_100(records);
  double sum = 0.0;
  for (const auto& r : records) sum += r.acr;
  s.acr_mean = sum / static_cast<double>(records.size());
  s.final_metric = records.back().mean_success_prob;
  s.steps = records.size();
  s.short_window = records.size() < kEarlyWindow;
  return s;
}

OlsFit ols_fit(std::span<const Point> points) {
  require(points.size() >= 3, "ols_fit needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
    syy += (p.y - my) * (p.y - my);
  }
  require(sxx > 0.0, "ols_fit: x has zero variance");
  OlsFit f;
  f.n_points = points.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy > 0.0) {
    f.pearson_r = sxy / std::sqrt(sxx * syy);
    double ss_res = 0.0;
    for (const auto& p : points) {
      const double e = p.y - f.predict(p.x);
      ss_res += e * e;
    }
    f.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return f;
}

Comparison compare_runs(const RunSummary& a, const RunSummary& b) {
  Comparison c;
  c.absolute_acr_difference = b.acr_mean - a.acr_mean;
  if (b.acr_mean > 0.0) c.relative_reduction = 1.0 - a.acr_mean / b.acr_mean;
  if (a.final_metric && b.final_metric) c.final_metric_delta = *a.final_metric - *b.final_metric;

  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  os << "candidate acr_mean: " << a.acr_mean << "  acr_100: " << a.acr_100 << "\n";
  os << "baseline  acr_mean: " << b.acr_mean << "  acr_100: " << b.acr_100 << "\n";
  if (c.relative_reduction) {
    os << "relative ACR reduction: " << std::setprecision(2) << 100.0 * *c.relative_reduction
       << "%\n"
       << std::setprecision(6);
  } else {
    os << "relative ACR reduction: undefined (baseline ACR is 0); absolute difference: "
       << c.absolute_acr_difference << "\n";
  }
  if (c.final_metric_delta) {
    os << "final metric delta: " << *c.final_metric_delta << "\n";
  } else {
    os << "final metric delta: n/a\n";
  }
  if (a.short_window || b.short_window) {
    os << "note: a run has fewer than 100 steps; acr_100 averages the steps available\n";
  }
  c.report = os.str();
  return c;
}

}  // namespace avspo
