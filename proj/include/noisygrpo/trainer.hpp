// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Training loop over the toy environment for the four method variants:
//
//   GRPO            clean rollouts,          group-normalized rewards
//   GRPOPlusNoise   noise-injected rollouts, group-normalized rewards
//   NaiveNoisyGRPO  noise-injected rollouts, equal-weight prior fusion
//   NoisyGRPO       noise-injected rollouts, adaptive prior fusion

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "noisygrpo/bayes_advantage.hpp"
#include "noisygrpo/error.hpp"
#include "noisygrpo/group_stats.hpp"
#include "noisygrpo/noise_schedule.hpp"
#include "noisygrpo/reward.hpp"
#include "noisygrpo/rng.hpp"
#include "noisygrpo/surrogate.hpp"
#include "noisygrpo/toyenv.hpp"

namespace noisygrpo {

enum class Method { GRPO, GRPOPlusNoise, NaiveNoisyGRPO, NoisyGRPO };

inline constexpr Method kAllMethods[] = {Method::GRPO, Method::GRPOPlusNoise,
                                         Method::NaiveNoisyGRPO, Method::NoisyGRPO};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::GRPO: return "GRPO";
    case Method::GRPOPlusNoise: return "GRPOPlusNoise";
    case Method::NaiveNoisyGRPO: return "NaiveNoisyGRPO";
    case Method::NoisyGRPO: return "NoisyGRPO";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : kAllMethods) {
    if (s == to_string(m)) return m;
  }
  throw InvalidInput("unknown method '" + std::string(s) +
                     "' (expected GRPO, GRPOPlusNoise, NaiveNoisyGRPO or NoisyGRPO)");
}

inline AdvantageMode advantage_mode_for(Method m) {
  switch (m) {
    case Method::GRPO:
    case Method::GRPOPlusNoise: return AdvantageMode::VanillaGRPO;
    case Method::NaiveNoisyGRPO: return AdvantageMode::NaiveNoisy;
    case Method::NoisyGRPO: return AdvantageMode::FullNoisy;
  }
  return AdvantageMode::VanillaGRPO;
}

struct ExperimentConfig {
  Method method = Method::NoisyGRPO;
  int iterations = 200;
  int groups_per_iteration = 32;
  int group_size = 4;
  int inner_epochs = 1;
  double learning_rate = 0.05;
  double temperature = 1.0;
  double init_scale = 1.0;  // std of the initial policy weights
  int eval_tasks = 512;
  int diffusion_steps = kDefaultDiffusionSteps;
  std::uint64_t seed = 0;

  ToyEnvConfig env;
  AdvantageParams advantage;
  SurrogateConfig surrogate;
  NoiseLevelSampler sampler = UniformLevels{1.0};
  RewardConfig reward;

  /// Method constraints are checked, never silently repaired.
  void validate() const {
    detail::require(iterations >= 1, "iterations must be >= 1");
    detail::require(groups_per_iteration >= 1, "groups_per_iteration must be >= 1");
    detail::require(group_size >= 2, "group_size must be >= 2");
    detail::require(inner_epochs >= 1, "inner_epochs must be >= 1");
    detail::require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be >= 0");
    detail::require(temperature > 0.0 && std::isfinite(temperature), "temperature must be > 0");
    detail::require(init_scale >= 0.0 && std::isfinite(init_scale), "init_scale must be >= 0");
    detail::require(eval_tasks >= 1, "eval_tasks must be >= 1");
    detail::require(diffusion_steps >= 1, "diffusion_steps must be >= 1");
    env.validate();
    advantage.validate();
    surrogate.validate();
    reward.validate();
    noisygrpo::validate(sampler);

    const std::string name(to_string(method));
    detail::require(advantage.mode == advantage_mode_for(method),
                    name + " requires advantage mode '" +
                        std::string(to_string(advantage_mode_for(method))) + "'");
    if (method == Method::GRPO) {
      const auto* fixed = std::get_if<FixedLevel>(&sampler);
      detail::require(fixed != nullptr && fixed->value == 0.0,
                      "GRPO requires the fixed(0) noise sampler (clean rollouts)");
    } else {
      detail::require(injects_noise(sampler), name + " requires a noise-injecting sampler");
    }
  }
};

/// Defaults for a method, satisfying its constraints.
inline ExperimentConfig make_experiment_config(Method method) {
  ExperimentConfig cfg;
  cfg.method = method;
  cfg.advantage.mode = advantage_mode_for(method);
  cfg.sampler = method == Method::GRPO ? NoiseLevelSampler{FixedLevel{0.0}}
                                       : NoiseLevelSampler{UniformLevels{1.0}};
  return cfg;
}

/// Rebinds a base config to another method, keeping everything else.
inline ExperimentConfig with_method(ExperimentConfig base, Method method) {
  base.method = method;
  base.advantage.mode = advantage_mode_for(method);
  if (method == Method::GRPO) {
    base.sampler = FixedLevel{0.0};
  } else if (!injects_noise(base.sampler)) {
    base.sampler = UniformLevels{1.0};
  }
  return base;
}

struct MetricRecord {
  int iteration = 0;
  double mean_accuracy_reward = 0.0;
  double reward_std = 0.0;  // mean within-group std of semantic rewards
  double mean_importance_weight = 0.0;
  double importance_weight_variance = 0.0;
  double eval_accuracy = 0.0;
};

/// One scored rollout group as seen by the advantage estimator.
struct GroupLogEntry {
  int iteration = 0;
  int group_index = 0;
  std::uint64_t group_id = 0;
  RewardedGroup group;
  std::vector<int> actions;
  std::vector<std::string> completions;
  AdvantageReport report;
};

using GroupObserver = std::function<void(const GroupLogEntry&)>;

struct ExperimentResult {
  std::vector<MetricRecord> metrics;
  PolicySnapshot final_policy;
};

/// Random untrained policy: weights ~ N(0, init_scale^2), zero bias. At unit
/// scale its logits are as peaked as the labeling rule's, so near-greedy
/// sampling on clean inputs yields identical rollouts.
inline PolicySnapshot initial_policy(const ExperimentConfig& cfg) {
  PolicySnapshot p(cfg.env.feature_dim, cfg.env.num_answers);
  Rng rng = make_stream(cfg.seed, {tag(StreamTag::kInit)});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : p.weights) v = cfg.init_scale * normal(rng);
  return p;
}

namespace detail {

inline double population_variance(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size());
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace detail

/// Runs one experiment. theta_old is refreshed to theta at the start of every
/// iteration; the reference policy stays at the initialization.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const GroupObserver& observer = {}) {
  cfg.validate();
  const ToyEnvironment env(cfg.env, cfg.seed);
  const NoiseSchedule schedule = build_schedule(cfg.diffusion_steps);
  Rng eval_rng = make_stream(cfg.seed, {tag(StreamTag::kEval)});
  const EvalSet eval_set = make_eval_set(env, cfg.eval_tasks, eval_rng);

  PolicySnapshot theta = initial_policy(cfg);
  const PolicySnapshot ref = theta;

  ExperimentResult result;
  result.metrics.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int it = 1; it <= cfg.iterations; ++it) {
    const PolicySnapshot theta_old = theta;
    SurrogateBatch batch;
    std::vector<double> accuracy;
    std::vector<double> group_stds;
    std::vector<double> weights;

    for (int g = 0; g < cfg.groups_per_iteration; ++g) {
      Rng rng = make_stream(cfg.seed, {tag(StreamTag::kGroup), static_cast<std::uint64_t>(it),
                                       static_cast<std::uint64_t>(g)});
      const ToyTask task = env.sample_task(rng);
      const auto rollouts = collect_group(env, task, theta_old, cfg.sampler, schedule,
                                          cfg.group_size, cfg.temperature, rng);
      const AnswerSpec spec = env.answer_spec(task);

      GroupLogEntry entry;
      entry.iteration = it;
      entry.group_index = g;
      entry.group_id = static_cast<std::uint64_t>(it - 1) *
                           static_cast<std::uint64_t>(cfg.groups_per_iteration) +
                       static_cast<std::uint64_t>(g);
      for (const auto& r : rollouts) {
        const double acc = accuracy_reward(extract_answer(r.completion), spec, cfg.reward);
        accuracy.push_back(acc);
        entry.group.noise_levels.push_back(r.noise_level);
        entry.group.semantic_rewards.push_back(acc + cfg.reward.format_weight *
                                                         format_reward(r.completion));
        entry.actions.push_back(r.action);
        entry.completions.push_back(r.completion);
      }
      entry.report = estimate_advantages(entry.group, cfg.advantage);
      group_stds.push_back(group_std(entry.group.semantic_rewards));
      weights.push_back(entry.report.importance_weight);

      for (std::size_t i = 0; i < rollouts.size(); ++i) {
        batch.contexts.push_back(task.observation);
        batch.actions.push_back(rollouts[i].action);
        batch.advantages.push_back(entry.report.advantages[i]);
      }
      if (observer) observer(entry);
    }

    for (int epoch = 0; epoch < cfg.inner_epochs; ++epoch) {
      const auto grad = objective_gradient(batch, theta, theta_old, ref, cfg.surrogate);
      for (std::size_t i = 0; i < theta.weights.size(); ++i) {
        theta.weights[i] += cfg.learning_rate * grad.weights[i];
      }
      for (std::size_t k = 0; k < theta.bias.size(); ++k) {
        theta.bias[k] += cfg.learning_rate * grad.bias[k];
      }
      if (!theta.finite()) throw TrainingDiverged(it, "non-finite policy parameters");
      for (const auto& x : batch.contexts) {
        for (double z : theta.logits(x)) {
          if (!std::isfinite(z)) throw TrainingDiverged(it, "policy logits overflowed");
        }
      }
    }

    MetricRecord rec;
    rec.iteration = it;
    rec.mean_accuracy_reward = detail::mean_of(accuracy);
    rec.reward_std = detail::mean_of(group_stds);
    rec.mean_importance_weight = detail::mean_of(weights);
    rec.importance_weight_variance = detail::population_variance(weights);
    rec.eval_accuracy = evaluate_on(theta, eval_set);
    result.metrics.push_back(rec);
  }
  result.final_policy = std::move(theta);
  return result;
}

struct AblationRow {
  Method method = Method::NoisyGRPO;
  std::uint64_t seed = 0;
  double final_eval_accuracy = 0.0;
  std::vector<MetricRecord> metrics;
};

/// One run per (method, seed) pair, in method-major order.
inline std::vector<AblationRow> run_ablation_grid(const ExperimentConfig& base,
                                                  const std::vector<Method>& methods,
                                                  const std::vector<std::uint64_t>& seeds) {
  detail::require(!methods.empty() && !seeds.empty(), "ablation grid needs methods and seeds");
  std::vector<AblationRow> rows;
  for (Method m : methods) {
    for (std::uint64_t s : seeds) {
      ExperimentConfig cfg = with_method(base, m);
      cfg.seed = s;
      auto res = run_experiment(cfg);
      rows.push_back({m, s, res.metrics.back().eval_accuracy, std::move(res.metrics)});
    }
  }
  return rows;
}

}  // namespace noisygrpo
