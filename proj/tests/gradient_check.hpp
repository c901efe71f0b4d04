// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Finite-difference audit of objective_gradient at random points.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "noisygrpo/surrogate.hpp"
#include "oracles.hpp"

namespace gradcheck {

struct Summary {
  int points = 0;
  int clipped_points = 0;    // some sample sits on a clipped branch
  int unclipped_points = 0;  // some sample sits on the unclipped branch
  double worst_relative_error = 0.0;
};

inline std::vector<double> flatten(const noisygrpo::PolicySnapshot& p) {
  std::vector<double> v(p.weights);
  v.insert(v.end(), p.bias.begin(), p.bias.end());
  return v;
}

inline noisygrpo::PolicySnapshot unflatten(const std::vector<double>& v, int d, int k) {
  noisygrpo::PolicySnapshot p(d, k);
  std::copy(v.begin(), v.begin() + d * k, p.weights.begin());
  std::copy(v.begin() + d * k, v.end(), p.bias.begin());
  return p;
}

/// Relative error per coordinate, |g - fd| / max(|g|, |fd|, floor). The
/// floor keeps coordinates whose true gradient is ~0 from dividing by noise.
inline double relative_error(double g, double fd, double floor = 1e-3) {
  return std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), floor});
}

/// Samples random batches and parameter triples, rejecting points within
/// kink_margin of a clip boundary (where the objective is not
/// differentiable), until `points` points have been checked.
inline Summary run(int points, std::uint64_t seed, double h = 1e-6, double kink_margin = 1e-4) {
  using namespace noisygrpo;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(1, 5), acts(2, 5), bsize(1, 6);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> eps_u(0.1, 0.3), beta_u(0.0, 0.1), pert(0.05, 0.6);
  Summary s;
  while (s.points < points) {
    const int d = dim(rng), k = acts(rng), n = bsize(rng);
    PolicySnapshot old(d, k), ref(d, k);
    for (double& v : old.weights) v = z(rng);
    for (double& v : old.bias) v = 0.5 * z(rng);
    for (double& v : ref.weights) v = z(rng);
    PolicySnapshot theta = old;
    const double spread = pert(rng);
    for (double& v : theta.weights) v += spread * z(rng);
    for (double& v : theta.bias) v += spread * z(rng);
    SurrogateBatch b;
    std::uniform_int_distribution<int> act(0, k - 1);
    for (int i = 0; i < n; ++i) {
      std::vector<double> x(static_cast<std::size_t>(d));
      for (double& v : x) v = z(rng);
      b.contexts.push_back(x);
      b.actions.push_back(act(rng));
      b.advantages.push_back(z(rng));
    }
    const SurrogateConfig cfg{eps_u(rng), beta_u(rng)};

    bool near_kink = false, any_clipped = false, any_unclipped = false;
    for (int i = 0; i < n; ++i) {
      const auto lp = log_softmax(theta.logits(b.contexts[i]));
      const auto lo = log_softmax(old.logits(b.contexts[i]));
      const double r = std::exp(lp[b.actions[i]] - lo[b.actions[i]]);
      if (std::abs(r - (1 - cfg.clip_eps)) < kink_margin || std::abs(r - (1 + cfg.clip_eps)) < kink_margin) {
        near_kink = true;
      }
      const double c = std::clamp(r, 1 - cfg.clip_eps, 1 + cfg.clip_eps);
      (r * b.advantages[i] <= c * b.advantages[i] ? any_unclipped : any_clipped) = true;
    }
    if (near_kink) continue;

    const auto g = objective_gradient(b, theta, old, ref, cfg);
    std::vector<double> gflat(g.weights);
    gflat.insert(gflat.end(), g.bias.begin(), g.bias.end());
    const auto f = [&](const std::vector<double>& p) {
      return objective(b, unflatten(p, d, k), old, ref, cfg);
    };
    const auto fd = oracle::central_difference(f, flatten(theta), h);
    for (std::size_t i = 0; i < fd.size(); ++i) {
      s.worst_relative_error = std::max(s.worst_relative_error, relative_error(gflat[i], fd[i]));
    }
    ++s.points;
    s.clipped_points += any_clipped;
    s.unclipped_points += any_unclipped;
  }
  return s;
}

}  // namespace gradcheck
