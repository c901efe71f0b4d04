// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Command implementations behind the `noisygrpo` CLI. Each returns a process
// exit code; 0 means nothing was written to the error stream.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "noisygrpo/bayes_advantage.hpp"
#include "noisygrpo/config_file.hpp"
#include "noisygrpo/diagnostics.hpp"
#include "noisygrpo/error.hpp"
#include "noisygrpo/noise_schedule.hpp"
#include "noisygrpo/records.hpp"
#include "noisygrpo/tensor_file.hpp"
#include "noisygrpo/trainer.hpp"

namespace noisygrpo {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitUsage = 2,
  kExitDiverged = 3,
};

namespace detail {

inline bool blank(const std::string& line) { return trim(line).empty(); }

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace detail

// -- advantages ---------------------------------------------------------------------

/// Reads rollout-group JSONL, writes one advantage record per line, in order.
inline int cmd_advantages(std::istream& in, std::ostream& out, std::ostream& err,
                          const AdvantageParams& params) {
  try {
    params.validate();
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    try {
      const auto rec = parse_rollout_group(line);
      const auto rep = estimate_advantages(rec.group, params);
      out << advantage_record_json(rec.group_id, rec.group, rep).dump() << '\n';
    } catch (const std::exception& e) {
      out.flush();
      err << "error: line " << lineno << ": " << e.what() << '\n';
      return kExitInputError;
    }
  }
  return kExitOk;
}

// -- train --------------------------------------------------------------------------

struct TrainOptions {
  std::string config_path;
  std::filesystem::path output_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool write_group_log = true;
};

/// Writes metrics.csv, metrics.json, policy.json and groups.jsonl.
inline int cmd_train(const TrainOptions& opt, std::ostream& log, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = read_experiment_config(opt.config_path);
    if (opt.seed) cfg.seed = *opt.seed;
    cfg.validate();
  } catch (const std::exception& e) {
    err << "error: " << opt.config_path << ": " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    std::filesystem::create_directories(opt.output_dir);
    std::ofstream groups_out;
    if (opt.write_group_log) groups_out = detail::open_output(opt.output_dir / "groups.jsonl");
    GroupObserver observer;
    if (opt.write_group_log) {
      observer = [&groups_out](const GroupLogEntry& e) {
        groups_out << advantage_record_json(static_cast<std::int64_t>(e.group_id), e.group, e.report,
                                            e.iteration)
                          .dump()
                   << '\n';
      };
    }
    const auto result = run_experiment(cfg, observer);

    auto csv = detail::open_output(opt.output_dir / "metrics.csv");
    write_metrics_csv(csv, cfg.method, cfg.seed, result.metrics);
    auto js = detail::open_output(opt.output_dir / "metrics.json");
    js << metrics_json(cfg.method, cfg.seed, result.metrics).dump(2) << '\n';
    auto pol = detail::open_output(opt.output_dir / "policy.json");
    pol << policy_json(result.final_policy).dump() << '\n';

    if (!opt.quiet) {
      const auto& last = result.metrics.back();
      log << to_string(cfg.method) << " seed=" << cfg.seed << " iterations=" << cfg.iterations
          << " final eval_acc=" << last.eval_accuracy << " reward_std=" << last.reward_std << '\n';
    }
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitOk;
}

// -- diagnose -----------------------------------------------------------------------

struct DiagnoseOptions {
  std::vector<std::string> log_paths;
  std::vector<ResidualKind> kinds = {ResidualKind::ObsMinusPrior, ResidualKind::PostMinusObs};
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output_dir;
  std::size_t histogram_bins = 30;
};

namespace detail {

inline Json residual_report(const ResidualSet& set, std::uint64_t seed) {
  Json j;
  j["count"] = set.values.size();
  j["run_id"] = set.run_id;
  j["iteration_range"] = {set.first_iteration, set.last_iteration};
  if (!set.values.empty()) {
    j["mean"] = group_mean(set.values);
    j["std"] = group_std(set.values);
  }

  if (set.values.size() < 3) {
    j["shapiro_wilk"] = "insufficient sample";
  } else {
    const auto sample = subsample(set.values, kShapiroWilkMaxN, seed);
    try {
      const auto sw = shapiro_wilk(sample);
      j["shapiro_wilk"] = {{"W", sw.statistic}, {"p_value", sw.p_value}, {"n", sample.size()}};
    } catch (const InvalidInput&) {
      j["shapiro_wilk"] = "degenerate sample";
    }
  }

  if (set.values.empty()) {
    j["kolmogorov_smirnov"] = "insufficient sample";
  } else {
    const auto ref = fit_gaussian(set.values);
    if (ref.variance > 0.0) {
      const auto ks = kolmogorov_smirnov(set.values, ref);
      j["kolmogorov_smirnov"] = {{"D", ks.statistic},
                                 {"p_value", ks.p_value},
                                 {"reference_mean", ref.mean},
                                 {"reference_variance", ref.variance}};
    } else {
      j["kolmogorov_smirnov"] = "degenerate sample";
    }
  }
  return j;
}

}  // namespace detail

/// Residual normality tests and the noise/correctness table over advantage
/// logs. Fails when no record carries a prior/observation fusion.
inline int cmd_diagnose(const DiagnoseOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.log_paths.empty()) {
    err << "error: diagnose needs at least one log file\n";
    return kExitUsage;
  }
  std::vector<AdvantageReport> reports;
  std::vector<RewardedGroup> groups;
  std::size_t records = 0, vanilla = 0;
  int first_it = 0, last_it = 0;
  std::vector<double> weights;

  for (const auto& path : opt.log_paths) {
    std::ifstream in(path);
    if (!in) {
      err << "error: cannot open '" << path << "'\n";
      return kExitInputError;
    }
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::blank(line)) continue;
      AdvantageRecord rec;
      try {
        rec = parse_advantage_record(line);
        rec.group.validate();
      } catch (const std::exception& e) {
        err << "error: " << path << ": line " << lineno << ": " << e.what() << '\n';
        return kExitInputError;
      }
      ++records;
      if (rec.iteration) {
        if (first_it == 0 || *rec.iteration < first_it) first_it = *rec.iteration;
        last_it = std::max(last_it, *rec.iteration);
      }
      groups.push_back(rec.group);
      if (rec.report.mode == AdvantageMode::VanillaGRPO) {
        ++vanilla;
        continue;
      }
      weights.push_back(rec.report.importance_weight);
      reports.push_back(std::move(rec.report));
    }
  }
  if (records == 0) {
    err << "error: no advantage records found\n";
    return kExitInputError;
  }
  if (reports.empty()) {
    err << "error: every record comes from vanilla GRPO advantages; residual analysis needs "
           "noise-prior fusion (run with mode naive or full, or a NoisyGRPO/NaiveNoisyGRPO training)\n";
    return kExitInputError;
  }

  std::string run_id;
  for (const auto& p : opt.log_paths) run_id += (run_id.empty() ? "" : ";") + p;

  Json report;
  report["version"] = kRecordVersion;
  report["records"] = records;
  report["fused_records"] = reports.size();
  report["vanilla_records_skipped"] = vanilla;
  report["importance_weight"] = {{"mean", group_mean(weights)},
                                 {"variance", std::pow(group_std(weights), 2)}};
  Json residuals = Json::object();
  try {
    for (ResidualKind kind : opt.kinds) {
      auto set = collect_residuals(reports, kind);
      set.run_id = run_id;
      set.first_iteration = first_it;
      set.last_iteration = last_it;
      residuals[std::string(to_string(kind))] = detail::residual_report(set, opt.seed);

      if (opt.output_dir && !set.values.empty()) {
        std::filesystem::create_directories(*opt.output_dir);
        const std::string stem = std::string(to_string(kind));
        auto hist = detail::open_output(*opt.output_dir / (stem + "_hist.csv"));
        hist << "bin_lower,bin_upper,count\n";
        for (const auto& b : histogram(set.values, opt.histogram_bins)) {
          hist << detail::fmt17(b.lower) << ',' << detail::fmt17(b.upper) << ',' << b.count << '\n';
        }
        auto qq = detail::open_output(*opt.output_dir / (stem + "_qq.csv"));
        qq << "theoretical,sample\n";
        for (const auto& q : qq_points(set.values)) {
          qq << detail::fmt17(q.theoretical) << ',' << detail::fmt17(q.sample) << '\n';
        }
      }
    }
    report["residuals"] = residuals;

    Json table = Json::array();
    const auto rows = noise_correctness_summary(groups);
    for (const auto& r : rows) {
      table.push_back({{"decile", r.decile},
                       {"noise_lower", r.decile / 10.0},
                       {"noise_upper", (r.decile + 1) / 10.0},
                       {"count", r.count},
                       {"mean_raw", r.mean_raw},
                       {"mean_normalized", r.mean_normalized}});
    }
    report["noise_correctness"] = table;
    if (opt.output_dir) {
      std::filesystem::create_directories(*opt.output_dir);
      auto csv = detail::open_output(*opt.output_dir / "noise_correctness.csv");
      csv << "decile,count,mean_raw,mean_normalized\n";
      for (const auto& r : rows) {
        csv << r.decile << ',' << r.count << ',' << detail::fmt17(r.mean_raw) << ','
            << detail::fmt17(r.mean_normalized) << '\n';
      }
      auto js = detail::open_output(*opt.output_dir / "report.json");
      js << report.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  out << report.dump(2) << '\n';
  return kExitOk;
}

// -- noise --------------------------------------------------------------------------

struct NoiseOptions {
  std::string input_path;
  std::string output_path;
  double level = 0.0;
  std::uint64_t seed = 0;
  int diffusion_steps = kDefaultDiffusionSteps;
};

inline int cmd_noise(const NoiseOptions& opt, std::ostream& err) {
  try {
    const auto schedule = build_schedule(opt.diffusion_steps);
    schedule.timestep_for(opt.level);
    Tensor t = read_tensor_file(opt.input_path);
    Rng rng = make_stream(opt.seed);
    t.data = forward_noise(t.data, opt.level, schedule, rng);
    write_tensor_file(opt.output_path, t);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace noisygrpo
