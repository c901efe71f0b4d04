// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Diffusion-style forward noising at a continuous noise level in [0, 1].
// Level n maps to timestep t = max(1, floor(n * T)); level 0 is the identity.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "noisygrpo/error.hpp"
#include "noisygrpo/rng.hpp"

namespace noisygrpo {

inline constexpr int kDefaultDiffusionSteps = 1000;
inline constexpr double kBetaStart = 1e-4;
inline constexpr double kBetaEnd = 0.02;

struct NoiseSchedule {
  int total_steps = 0;
  std::vector<double> betas;
  std::vector<double> alpha_bars;  // alpha_bars[t-1] after t steps

  /// Cumulative signal coefficient at timestep t in [1, T].
  double alpha_bar_at(int t) const { return alpha_bars.at(static_cast<std::size_t>(t - 1)); }

  int timestep_for(double level) const {
    detail::require(std::isfinite(level) && level >= 0.0 && level <= 1.0,
                    "noise level outside [0, 1]");
    if (level == 0.0) return 0;
    const int t = static_cast<int>(std::floor(level * total_steps));
    return std::clamp(t, 1, total_steps);
  }
};

/// Linear beta schedule from 1e-4 to 0.02.
inline NoiseSchedule build_schedule(int total_steps = kDefaultDiffusionSteps) {
  detail::require(total_steps >= 1, "build_schedule: total_steps must be >= 1");
  NoiseSchedule s;
  s.total_steps = total_steps;
  s.betas.resize(static_cast<std::size_t>(total_steps));
  s.alpha_bars.resize(static_cast<std::size_t>(total_steps));
  double running = 1.0;
  for (int t = 0; t < total_steps; ++t) {
    const double beta =
        total_steps == 1
            ? kBetaStart
            : kBetaStart + (kBetaEnd - kBetaStart) * static_cast<double>(t) / (total_steps - 1);
    running *= 1.0 - beta;
    s.betas[static_cast<std::size_t>(t)] = beta;
    s.alpha_bars[static_cast<std::size_t>(t)] = running;
  }
  return s;
}

/// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps. Level 0 returns x0 unchanged.
inline std::vector<double> forward_noise(std::span<const double> x0, double level,
                                         const NoiseSchedule& schedule, Rng& rng) {
  const int t = schedule.timestep_for(level);
  std::vector<double> out(x0.begin(), x0.end());
  if (t == 0) return out;
  const double abar = schedule.alpha_bar_at(t);
  const double signal = std::sqrt(abar);
  const double noise = std::sqrt(1.0 - abar);
  std::normal_distribution<double> eps(0.0, 1.0);
  for (double& v : out) v = signal * v + noise * eps(rng);
  return out;
}

// -- noise-level samplers ----------------------------------------------------

struct UniformLevels {
  double upper = 1.0;  // levels ~ U(0, upper)
};

struct GaussianLevels {
  double mean = 0.0;
  double variance = 0.1;  // draws are clipped into [0, 1]
};

struct FixedLevel {
  double value = 0.5;
};

using NoiseLevelSampler = std::variant<UniformLevels, GaussianLevels, FixedLevel>;

inline void validate(const NoiseLevelSampler& sampler) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, UniformLevels>) {
          detail::require(s.upper > 0.0 && s.upper <= 1.0, "uniform sampler: upper must be in (0, 1]");
        } else if constexpr (std::is_same_v<S, GaussianLevels>) {
          detail::require(std::isfinite(s.mean) && s.variance > 0.0,
                          "gaussian sampler: variance must be > 0");
        } else {
          detail::require(s.value >= 0.0 && s.value <= 1.0, "fixed sampler: value outside [0, 1]");
        }
      },
      sampler);
}

inline double sample_level(const NoiseLevelSampler& sampler, Rng& rng) {
  return std::visit(
      [&rng](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, UniformLevels>) {
          return std::uniform_real_distribution<double>(0.0, s.upper)(rng);
        } else if constexpr (std::is_same_v<S, GaussianLevels>) {
          const double v = std::normal_distribution<double>(s.mean, std::sqrt(s.variance))(rng);
          return std::clamp(v, 0.0, 1.0);
        } else {
          return s.value;
        }
      },
      sampler);
}

/// True when the sampler can emit a nonzero level.
inline bool injects_noise(const NoiseLevelSampler& sampler) {
  if (const auto* f = std::get_if<FixedLevel>(&sampler)) return f->value > 0.0;
  return true;
}

inline std::string describe(const NoiseLevelSampler& sampler) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, UniformLevels>) {
          return "uniform(0," + std::to_string(s.upper) + ")";
        } else if constexpr (std::is_same_v<S, GaussianLevels>) {
          return "gaussian(" + std::to_string(s.mean) + "," + std::to_string(s.variance) + ")";
        } else {
          return "fixed(" + std::to_string(s.value) + ")";
        }
      },
      sampler);
}

}  // namespace noisygrpo
