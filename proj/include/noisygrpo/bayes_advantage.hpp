// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Bayesian advantage estimation for noise-injected rollout groups.
//
// The prior for rollout i is r^n_i = 1 - n_i (less input noise, better
// expected trajectory); the observation is its semantic reward r^s_i. Both
// are group-normalized, fused as a Gaussian posterior mean
//
//   r_hat_i = r^s_hat_i + w * (r^n_hat_i - r^s_hat_i),  w = s_s / (s_n + s_s)
//
// with s_s = alpha and s_n = gamma / (gamma + std(r^s)^2) over the raw
// rewards, and the posterior is normalized again to give the advantage.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noisygrpo/error.hpp"
#include "noisygrpo/group_stats.hpp"

namespace noisygrpo {

enum class AdvantageMode { VanillaGRPO, NaiveNoisy, FullNoisy };

inline std::string_view to_string(AdvantageMode m) {
  switch (m) {
    case AdvantageMode::VanillaGRPO: return "vanilla";
    case AdvantageMode::NaiveNoisy: return "naive";
    case AdvantageMode::FullNoisy: return "full";
  }
  return "?";
}

inline AdvantageMode parse_advantage_mode(std::string_view s) {
  if (s == "vanilla" || s == "VanillaGRPO") return AdvantageMode::VanillaGRPO;
  if (s == "naive" || s == "NaiveNoisy") return AdvantageMode::NaiveNoisy;
  if (s == "full" || s == "FullNoisy") return AdvantageMode::FullNoisy;
  throw InvalidInput("unknown advantage mode '" + std::string(s) +
                     "' (expected vanilla, naive or full)");
}

struct AdvantageParams {
  double alpha = 0.1;   // observation variance
  double gamma = 0.01;  // prior-variance scale
  AdvantageMode mode = AdvantageMode::FullNoisy;

  void validate() const {
    detail::require(alpha > 0.0 && std::isfinite(alpha), "AdvantageParams: alpha must be > 0");
    detail::require(gamma > 0.0 && std::isfinite(gamma), "AdvantageParams: gamma must be > 0");
  }
};

/// Noise levels and semantic rewards of one rollout group.
struct RewardedGroup {
  std::vector<double> noise_levels;
  std::vector<double> semantic_rewards;

  std::size_t size() const noexcept { return noise_levels.size(); }

  void validate() const {
    detail::require(noise_levels.size() == semantic_rewards.size(),
                    "RewardedGroup: noise_levels and semantic_rewards differ in length");
    detail::require(noise_levels.size() >= 2, "RewardedGroup: group size must be at least 2");
    for (double n : noise_levels) {
      detail::require(std::isfinite(n) && n >= 0.0 && n <= 1.0,
                      "RewardedGroup: noise level outside [0, 1]");
    }
    for (double r : semantic_rewards) {
      detail::require(std::isfinite(r), "RewardedGroup: non-finite semantic reward");
    }
  }
};

/// Every intermediate of one estimation. VanillaGRPO reports
/// importance_weight = 0 since no fusion takes place.
struct AdvantageReport {
  AdvantageMode mode = AdvantageMode::FullNoisy;
  std::vector<double> advantages;
  std::vector<double> prior_normed;
  std::vector<double> obs_normed;
  std::vector<double> posterior;
  double sigma_n_sq = 0.0;
  double sigma_s_sq = 0.0;
  double importance_weight = 0.0;
};

inline double prior_reward(double noise_level) {
  detail::require(std::isfinite(noise_level) && noise_level >= 0.0 && noise_level <= 1.0,
                  "prior_reward: noise level outside [0, 1]");
  return 1.0 - noise_level;
}

/// gamma / (gamma + std^2) over the raw semantic rewards.
inline double prior_variance(std::span<const double> semantic_rewards, double gamma) {
  detail::require(gamma > 0.0 && std::isfinite(gamma), "prior_variance: gamma must be > 0");
  const double sd = group_std(semantic_rewards);
  return gamma / (gamma + sd * sd);
}

inline double importance_weight(double sigma_n_sq, double sigma_s_sq) {
  detail::require(sigma_n_sq > 0.0 && sigma_s_sq > 0.0,
                  "importance_weight: variances must be positive");
  return sigma_s_sq / (sigma_n_sq + sigma_s_sq);
}

inline double posterior_fuse(double prior_normed, double obs_normed, double sigma_n_sq,
                             double sigma_s_sq) {
  const double w = importance_weight(sigma_n_sq, sigma_s_sq);
  return obs_normed + w * (prior_normed - obs_normed);
}

inline AdvantageReport estimate_advantages(const RewardedGroup& group,
                                           const AdvantageParams& params) {
  group.validate();
  params.validate();

  const std::size_t g = group.size();
  std::vector<double> prior(g);
  for (std::size_t i = 0; i < g; ++i) prior[i] = prior_reward(group.noise_levels[i]);

  AdvantageReport rep;
  rep.mode = params.mode;
  rep.prior_normed = normalize(prior);
  rep.obs_normed = normalize(group.semantic_rewards);
  rep.sigma_n_sq = prior_variance(group.semantic_rewards, params.gamma);

  if (params.mode == AdvantageMode::VanillaGRPO) {
    rep.sigma_s_sq = params.alpha;
    rep.posterior = rep.obs_normed;
    rep.advantages = rep.obs_normed;
    rep.importance_weight = 0.0;
    return rep;
  }

  rep.sigma_s_sq = params.mode == AdvantageMode::NaiveNoisy ? rep.sigma_n_sq : params.alpha;
  rep.importance_weight = importance_weight(rep.sigma_n_sq, rep.sigma_s_sq);
  rep.posterior.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    rep.posterior[i] =
        posterior_fuse(rep.prior_normed[i], rep.obs_normed[i], rep.sigma_n_sq, rep.sigma_s_sq);
  }
  rep.advantages = normalize(rep.posterior);
  return rep;
}

}  // namespace noisygrpo
