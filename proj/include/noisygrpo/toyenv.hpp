// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic grounded-QA environment. An "image" is a standard-normal feature
// vector; the answer to its question is argmax_k x^T W*, where the labeling
// matrix W* is hidden from the policy. Forward noising the observation
// destroys the evidence the answer depends on.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "noisygrpo/error.hpp"
#include "noisygrpo/noise_schedule.hpp"
#include "noisygrpo/reward.hpp"
#include "noisygrpo/rng.hpp"
#include "noisygrpo/surrogate.hpp"

namespace noisygrpo {

struct ToyEnvConfig {
  int feature_dim = 8;
  int num_answers = 4;

  void validate() const {
    detail::require(feature_dim > 0, "ToyEnvConfig: feature_dim must be positive");
    detail::require(num_answers >= 2, "ToyEnvConfig: num_answers must be at least 2");
  }
};

struct ToyTask {
  std::uint64_t question_id = 0;
  std::vector<double> observation;  // clean
  int answer = 0;
};

struct ToyRollout {
  double noise_level = 0.0;
  std::vector<double> noised_observation;
  int action = 0;
  std::string completion;
  double log_prob_old = 0.0;  // un-tempered policy on the clean observation
};

/// Index of the largest entry; ties go to the lowest index.
inline int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

/// Draws an index from softmax(logits / temperature) by inverse CDF.
inline int sample_action(std::span<const double> logits, double temperature, Rng& rng) {
  const auto p = softmax(logits, temperature);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return static_cast<int>(k);
  }
  return argmax(p);
}

inline std::string answer_text(int action) { return "answer-" + std::to_string(action); }

class ToyEnvironment {
 public:
  ToyEnvironment(ToyEnvConfig cfg, std::uint64_t experiment_seed) : cfg_(cfg) {
    cfg_.validate();
    PolicySnapshot w(cfg_.feature_dim, cfg_.num_answers);
    Rng rng = make_stream(experiment_seed, {tag(StreamTag::kLabeling)});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : w.weights) v = normal(rng);
    labeling_ = std::move(w);
  }

  const ToyEnvConfig& config() const noexcept { return cfg_; }
  int feature_dim() const noexcept { return cfg_.feature_dim; }
  int num_answers() const noexcept { return cfg_.num_answers; }

  int label(std::span<const double> observation) const {
    return argmax(labeling_.logits(observation));
  }

  /// A policy whose parameters are the hidden labeling weights.
  const PolicySnapshot& oracle_policy() const noexcept { return labeling_; }

  ToyTask sample_task(Rng& rng) const {
    ToyTask t;
    t.question_id = rng();
    std::normal_distribution<double> normal(0.0, 1.0);
    t.observation.resize(static_cast<std::size_t>(cfg_.feature_dim));
    for (double& v : t.observation) v = normal(rng);
    t.answer = label(t.observation);
    return t;
  }

  AnswerSpec answer_spec(const ToyTask& task) const {
    return {AnswerKind::MultipleChoice, answer_text(task.answer)};
  }

  /// Templated completion; always well-formed.
  static std::string completion_for(const ToyTask& task, double noise_level, int action) {
    return "<think>question " + std::to_string(task.question_id % 100000) +
           ": weighing the visual evidence at noise " + std::to_string(noise_level) +
           "</think>" + answer_text(action);
  }

 private:
  ToyEnvConfig cfg_;
  PolicySnapshot labeling_;
};

/// G rollouts for one task, each under its own sampled noise level. Actions
/// are drawn on the noised observation; log_prob_old is recorded on the
/// clean one, where the policy update evaluates ratios.
inline std::vector<ToyRollout> collect_group(const ToyEnvironment& env, const ToyTask& task,
                                             const PolicySnapshot& policy,
                                             const NoiseLevelSampler& sampler,
                                             const NoiseSchedule& schedule, int group_size,
                                             double temperature, Rng& rng) {
  detail::require(group_size >= 2, "collect_group: group size must be at least 2");
  detail::require(temperature > 0.0 && std::isfinite(temperature),
                  "collect_group: temperature must be > 0");
  const auto clean_log_p = log_softmax(policy.logits(task.observation));

  std::vector<ToyRollout> out(static_cast<std::size_t>(group_size));
  for (auto& r : out) {
    r.noise_level = sample_level(sampler, rng);
    r.noised_observation = forward_noise(task.observation, r.noise_level, schedule, rng);
    r.action = sample_action(policy.logits(r.noised_observation), temperature, rng);
    r.completion = ToyEnvironment::completion_for(task, r.noise_level, r.action);
    r.log_prob_old = clean_log_p[static_cast<std::size_t>(r.action)];
  }
  return out;
}

/// Held-out tasks, fixed for the lifetime of an experiment.
struct EvalSet {
  std::vector<std::vector<double>> observations;
  std::vector<int> answers;
};

inline EvalSet make_eval_set(const ToyEnvironment& env, int num_tasks, Rng& rng) {
  detail::require(num_tasks >= 1, "evaluation needs at least one task");
  EvalSet set;
  for (int i = 0; i < num_tasks; ++i) {
    auto t = env.sample_task(rng);
    set.observations.push_back(std::move(t.observation));
    set.answers.push_back(t.answer);
  }
  return set;
}

/// Greedy accuracy on clean observations.
inline double evaluate_on(const PolicySnapshot& policy, const EvalSet& set) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.answers.size(); ++i) {
    if (argmax(policy.logits(set.observations[i])) == set.answers[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.answers.size());
}

inline double evaluate_policy(const ToyEnvironment& env, const PolicySnapshot& policy,
                              int num_tasks, Rng& rng) {
  return evaluate_on(policy, make_eval_set(env, num_tasks, rng));
}

}  // namespace noisygrpo
