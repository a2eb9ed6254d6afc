#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "avspo/diagnostics.hpp"
#include "avspo/environment.hpp"
#include "avspo/error.hpp"
#include "avspo/kv_file.hpp"
#include "avspo/trace_io.hpp"
#include "avspo/train_config_io.hpp"
#include "avspo/trainer.hpp"

namespace avspo::cli {

namespace fs = std::filesystem;

std::string resolve_output_path(const std::string& path) {
  const char* dir = std::getenv("AVSPO_OUTPUT_DIR");
  if (dir == nullptr || *dir == '\0' || fs::path(path).is_absolute()) return path;
  return (fs::path(dir) / path).string();
}

namespace {

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::ofstream open_output(const std::string& path) {
  ensure_parent(path);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ParseError("cannot open '" + path + "' for writing");
  return f;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  TrainConfig config;
  Environment env{EnvSpec{}, {}, TabularPolicy(1, 1, 2)};
  try {
    config = load_train_config(opt.config_path);
    if (opt.seed) config.seed = *opt.seed;
    env = build_environment(load_env_spec(opt.env_path));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  const std::string path = resolve_output_path(opt.out_path);
  try {
    std::ofstream f = open_output(path);
    TraceWriter writer(f);
    const auto records = train(config, env, [&](const StepRecord& r) { writer.write(r); });
    f.flush();
    if (!f) throw ParseError("write to '" + path + "' failed");
    if (!records.empty()) {
      const auto s = summarize_run(records);
      out << "wrote " << records.size() << " records to " << path << "\n"
          << "acr_100 " << fmt(s.acr_100) << "  acr_mean " << fmt(s.acr_mean);
      if (s.final_metric) out << "  final_success " << fmt(*s.final_metric);
      out << "\n";
    } else {
      out << "wrote 0 records to " << path << "\n";
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_diagnose(const DiagnoseOptions& opt, std::ostream& out, std::ostream& err) {
  std::vector<ExternalRewardLine> lines;
  try {
    std::ifstream in(opt.log_path);
    if (!in) throw ParseError("cannot open reward log '" + opt.log_path + "'");
    lines = read_reward_log(in);
    if (lines.empty()) throw ParseError("reward log '" + opt.log_path + "' has no steps");
    require(opt.tau > 0.0, "tau must be positive");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<double> acr;
  std::vector<CollapseBreakdown> breakdown;
  for (const auto& line : lines) {
    const Batch batch = to_batch(line);
    acr.push_back(compute_acr(batch, opt.tau));
    breakdown.push_back(collapse_breakdown(batch, opt.tau));
  }
  const double early = acr_100(acr);
  double acr_sum = 0.0;
  double wrong_sum = 0.0;
  double correct_sum = 0.0;
  for (std::size_t i = 0; i < acr.size(); ++i) {
    acr_sum += acr[i];
    wrong_sum += breakdown[i].all_wrong_fraction;
    correct_sum += breakdown[i].all_correct_fraction;
  }
  const double n = static_cast<double>(acr.size());
  const double predicted = opt.intercept + opt.slope * early;

  std::ostringstream report;
  report << "ACR diagnosis\n";
  report << "steps: " << acr.size() << "\n";
  report << "tau: " << opt.tau << "\n";
  report << "acr_100: " << fmt(early) << "\n";
  report << "acr_mean: " << fmt(acr_sum / n) << "\n";
  report << "all_wrong_mean: " << fmt(wrong_sum / n) << "\n";
  report << "all_correct_mean: " << fmt(correct_sum / n) << "\n";
  if (acr.size() < kEarlyWindow) {
    report << "window: short (" << acr.size() << " steps < " << kEarlyWindow
           << "); acr_100 averages the steps available\n";
  } else {
    report << "window: first " << kEarlyWindow << " steps\n";
  }
  report << "alert_level: " << fmt(opt.alert_level) << "\n";
  if (early > opt.alert_level) {
    report << "ALERT: acr_100 " << fmt(early) << " exceeds alert level " << fmt(opt.alert_level)
           << "\n";
  } else {
    report << "status: ok\n";
  }
  report << "regression: final_metric = " << opt.intercept << " + (" << opt.slope
         << ") * acr_100";
  if (opt.slope == DiagnoseOptions{}.slope && opt.intercept == DiagnoseOptions{}.intercept) {
    report << "  [default coefficients, fit to published LLM math-reasoning runs; "
              "a domain-specific prior, not a calibrated predictor]";
  }
  report << "\n";
  report << "predicted_final_metric: " << fmt(predicted, 2) << "\n";

  out << report.str();
  try {
    if (!opt.out_path.empty()) {
      std::ofstream f = open_output(resolve_output_path(opt.out_path));
      f << report.str();
    }
    if (!opt.csv_path.empty()) {
      std::ofstream f = open_output(resolve_output_path(opt.csv_path));
      f << "step,acr,all_wrong_frac,all_correct_frac\n";
      f << std::setprecision(17);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        f << lines[i].step << "," << acr[i] << "," << breakdown[i].all_wrong_fraction << ","
          << breakdown[i].all_correct_fraction << "\n";
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

namespace {

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

struct CellResult {
  std::vector<std::string> values;
  bool ok = false;
  std::string error;
  RunSummary summary;
};

}  // namespace

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  KvFile base_config;
  KvFile base_env;
  std::vector<SweepAxis> axes;
  try {
    base_config = KvFile::load(opt.config_path);
    base_env = KvFile::load(opt.env_path);
    const KvFile sweep = KvFile::load(opt.sweep_path);
    for (const auto& e : sweep.entries()) {
      const bool env_key = e.key.rfind("env.", 0) == 0;
      if (!env_key && !train_config_keys().contains(e.key)) {
        throw ParseError(opt.sweep_path + ":" + std::to_string(e.line) + ": unknown sweep key '" +
                         e.key + "'");
      }
      SweepAxis axis{e.key, split_list(e.value)};
      for (const auto& v : axis.values) {
        if (v.empty()) throw ParseError("sweep key '" + e.key + "' has an empty value");
      }
      axes.push_back(std::move(axis));
    }
    if (axes.empty()) throw ParseError("sweep spec '" + opt.sweep_path + "' lists no parameters");
    if (!opt.group_by.empty()) {
      bool found = false;
      for (const auto& a : axes) found = found || a.key == opt.group_by;
      if (!found) throw ParseError("group-by key '" + opt.group_by + "' is not a sweep key");
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  // Cross product, first axis varying slowest.
  std::vector<std::vector<std::string>> cells{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<std::string>> next;
    for (const auto& partial : cells) {
      for (const auto& v : axis.values) {
        auto c = partial;
        c.push_back(v);
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }

  const std::string dir = resolve_output_path(opt.out_dir);
  fs::create_directories(dir);
  auto cell_name = [](std::size_t i) {
    std::ostringstream os;
    os << "cell_" << std::setw(3) << std::setfill('0') << i;
    return os.str();
  };

  std::vector<CellResult> results(cells.size());
  const long n_cells = static_cast<long>(cells.size());
  const int jobs = std::max(1, opt.jobs);
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (long ci = 0; ci < n_cells; ++ci) {
    const auto i = static_cast<std::size_t>(ci);
    CellResult& res = results[i];
    res.values = cells[i];
    try {
      KvFile cfg_kv = base_config;
      KvFile env_kv = base_env;
      for (std::size_t a = 0; a < axes.size(); ++a) {
        if (axes[a].key.rfind("env.", 0) == 0) {
          env_kv.set(axes[a].key.substr(4), cells[i][a]);
        } else {
          cfg_kv.set(axes[a].key, cells[i][a]);
        }
      }
      TrainConfig config = train_config_from_kv(cfg_kv);
      config.execution = Execution::kSerial;
      const Environment env = build_environment(env_spec_from_kv(env_kv));
      std::ofstream f = open_output((fs::path(dir) / (cell_name(i) + ".jsonl")).string());
      TraceWriter writer(f);
      const auto records = train(config, env, [&](const StepRecord& r) { writer.write(r); });
      if (records.empty()) throw InvalidArgument("cell ran zero iterations");
      res.summary = summarize_run(records);
      res.ok = true;
    } catch (const std::exception& e) {
      res.error = e.what();
    }
  }

  std::size_t failures = 0;
  try {
    std::ofstream csv = open_output((fs::path(dir) / "summary.csv").string());
    csv << "cell";
    for (const auto& a : axes) csv << "," << a.key;
    csv << ",status,steps,acr_100,acr_mean,final_metric,error\n";
    csv << std::setprecision(17);
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      csv << cell_name(i);
      for (const auto& v : r.values) csv << "," << csv_escape(v);
      if (r.ok) {
        csv << ",ok," << r.summary.steps << "," << r.summary.acr_100 << "," << r.summary.acr_mean
            << ",";
        if (r.summary.final_metric) csv << *r.summary.final_metric;
        csv << ",\n";
      } else {
        ++failures;
        csv << ",failed,,,,," << csv_escape(r.error) << "\n";
        err << cell_name(i) << " failed: " << r.error << "\n";
      }
    }

    // Outcome-on-early-ACR fits over the successful cells.
    std::map<std::string, std::vector<Point>> by_group;
    std::size_t group_axis = axes.size();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      if (axes[a].key == opt.group_by) group_axis = a;
    }
    for (const auto& r : results) {
      if (!r.ok || !r.summary.final_metric) continue;
      const Point p{r.summary.acr_100, *r.summary.final_metric};
      by_group["all"].push_back(p);
      if (group_axis < axes.size()) by_group[opt.group_by + "=" + r.values[group_axis]].push_back(p);
    }
    std::ofstream fit = open_output((fs::path(dir) / "fit.txt").string());
    fit << "OLS fits of final_metric on acr_100\n";
    for (const auto& [name, pts] : by_group) {
      fit << name << ": ";
      try {
        const OlsFit f = ols_fit(pts);
        fit << "slope " << f.slope << " intercept " << f.intercept << " r " << f.pearson_r
            << " r2 " << f.r_squared << " n " << f.n_points << "\n";
      } catch (const InvalidArgument& e) {
        fit << "no fit (" << e.what() << ")\n";
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  out << "sweep: " << results.size() << " cells, " << (results.size() - failures) << " ok, "
      << failures << " failed; summary at " << (fs::path(dir) / "summary.csv").string() << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const auto a = read_trace_file(opt.candidate_path);
    const auto b = read_trace_file(opt.baseline_path);
    if (a.empty() || b.empty()) throw ParseError("both traces must contain at least one record");
    auto sa = summarize_run(a);
    const auto sb = summarize_run(b);
    const Comparison c = compare_runs(sa, sb);
    out << c.report;
    if (!opt.out_path.empty()) {
      std::ofstream f = open_output(resolve_output_path(opt.out_path));
      f << c.report;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace avspo::cli
