// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Clipped surrogate objective with a KL penalty toward a frozen reference,
// evaluated for a linear-softmax policy over K discrete answers:
//
//   J = mean_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i)
//       - beta * mean_i KL(pi_theta(.|x_i) || pi_ref(.|x_i))
//
// with rho_i = pi_theta(a_i|x_i) / pi_old(a_i|x_i) on clean contexts.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "noisygrpo/error.hpp"

namespace noisygrpo {

/// Linear-softmax policy: logits = x^T W + b, W stored row-major (d x K).
struct PolicySnapshot {
  int feature_dim = 0;
  int num_actions = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  PolicySnapshot() = default;
  PolicySnapshot(int d, int k)
      : feature_dim(d),
        num_actions(k),
        weights(static_cast<std::size_t>(d) * static_cast<std::size_t>(k), 0.0),
        bias(static_cast<std::size_t>(k), 0.0) {
    detail::require(d > 0 && k > 0, "PolicySnapshot: dimensions must be positive");
  }

  double& w(int feature, int action) {
    return weights[static_cast<std::size_t>(feature) * num_actions + action];
  }
  double w(int feature, int action) const {
    return weights[static_cast<std::size_t>(feature) * num_actions + action];
  }

  std::vector<double> logits(std::span<const double> x) const {
    detail::require(static_cast<int>(x.size()) == feature_dim, "logits: context has wrong dimension");
    std::vector<double> z(bias);
    for (int f = 0; f < feature_dim; ++f) {
      const double xf = x[static_cast<std::size_t>(f)];
      const double* row = weights.data() + static_cast<std::size_t>(f) * num_actions;
      for (int k = 0; k < num_actions; ++k) z[static_cast<std::size_t>(k)] += xf * row[k];
    }
    return z;
  }

  bool finite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    return std::all_of(weights.begin(), weights.end(), ok) && std::all_of(bias.begin(), bias.end(), ok);
  }

  friend bool operator==(const PolicySnapshot&, const PolicySnapshot&) = default;
};

/// Gradient with the same layout as PolicySnapshot parameters.
struct PolicyGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

/// log softmax(z / temperature), computed with max subtraction.
inline std::vector<double> log_softmax(std::span<const double> z, double temperature = 1.0) {
  detail::require(temperature > 0.0 && std::isfinite(temperature), "temperature must be > 0");
  const double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    out[k] = (z[k] - zmax) / temperature;
    sum += std::exp(out[k]);
  }
  const double lse = std::log(sum);
  for (double& v : out) v -= lse;
  return out;
}

inline std::vector<double> softmax(std::span<const double> z, double temperature = 1.0) {
  auto out = log_softmax(z, temperature);
  for (double& v : out) v = std::exp(v);
  return out;
}

/// Exact KL(p || q) between categorical distributions given as log-probs.
inline double categorical_kl(std::span<const double> log_p, std::span<const double> log_q) {
  double kl = 0.0;
  for (std::size_t k = 0; k < log_p.size(); ++k) kl += std::exp(log_p[k]) * (log_p[k] - log_q[k]);
  return std::max(kl, 0.0);
}

struct SurrogateConfig {
  double clip_eps = 0.2;
  double kl_beta = 0.04;

  void validate() const {
    detail::require(clip_eps > 0.0 && clip_eps < 1.0, "SurrogateConfig: clip_eps must be in (0, 1)");
    detail::require(kl_beta >= 0.0 && std::isfinite(kl_beta), "SurrogateConfig: kl_beta must be >= 0");
  }
};

/// Clean contexts, taken actions and advantages for one update batch.
struct SurrogateBatch {
  std::vector<std::vector<double>> contexts;
  std::vector<int> actions;
  std::vector<double> advantages;

  std::size_t size() const noexcept { return actions.size(); }
};

inline double clipped_term(double ratio, double advantage, double clip_eps) {
  detail::require(ratio > 0.0 && std::isfinite(ratio), "clipped_term: ratio must be > 0");
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(ratio * advantage, clipped * advantage);
}

namespace detail {

inline void check_batch(const SurrogateBatch& batch, const PolicySnapshot& theta,
                        const PolicySnapshot& theta_old, const PolicySnapshot& ref) {
  require(batch.size() > 0, "surrogate: empty batch");
  require(batch.contexts.size() == batch.size() && batch.advantages.size() == batch.size(),
          "surrogate: batch lists differ in length");
  for (const auto* p : {&theta_old, &ref}) {
    require(p->feature_dim == theta.feature_dim && p->num_actions == theta.num_actions,
            "surrogate: policy snapshots differ in shape");
  }
  for (int a : batch.actions) {
    require(a >= 0 && a < theta.num_actions, "surrogate: action id out of range");
  }
}

struct SampleTerms {
  std::vector<double> log_p;
  std::vector<double> log_ref;
  double ratio;
};

inline SampleTerms sample_terms(const SurrogateBatch& batch, std::size_t i,
                                const PolicySnapshot& theta, const PolicySnapshot& theta_old,
                                const PolicySnapshot& ref) {
  const auto& x = batch.contexts[i];
  const auto a = static_cast<std::size_t>(batch.actions[i]);
  SampleTerms t{log_softmax(theta.logits(x)), log_softmax(ref.logits(x)), 0.0};
  const double log_old = log_softmax(theta_old.logits(x))[a];
  require(log_old > -std::numeric_limits<double>::infinity(),
          "surrogate: taken action has zero probability under the old policy");
  t.ratio = std::exp(t.log_p[a] - log_old);
  return t;
}

}  // namespace detail

inline double objective(const SurrogateBatch& batch, const PolicySnapshot& theta,
                        const PolicySnapshot& theta_old, const PolicySnapshot& ref,
                        const SurrogateConfig& cfg) {
  cfg.validate();
  detail::check_batch(batch, theta, theta_old, ref);
  double surrogate = 0.0;
  double kl = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto t = detail::sample_terms(batch, i, theta, theta_old, ref);
    surrogate += clipped_term(t.ratio, batch.advantages[i], cfg.clip_eps);
    kl += categorical_kl(t.log_p, t.log_ref);
  }
  const auto n = static_cast<double>(batch.size());
  return surrogate / n - cfg.kl_beta * kl / n;
}

/// Exact gradient of objective() w.r.t. theta. When the two clip branches
/// tie, the unclipped branch supplies the gradient.
inline PolicyGradient objective_gradient(const SurrogateBatch& batch, const PolicySnapshot& theta,
                                         const PolicySnapshot& theta_old, const PolicySnapshot& ref,
                                         const SurrogateConfig& cfg) {
  cfg.validate();
  detail::check_batch(batch, theta, theta_old, ref);
  const auto k_count = static_cast<std::size_t>(theta.num_actions);
  PolicyGradient grad{std::vector<double>(theta.weights.size(), 0.0),
                      std::vector<double>(k_count, 0.0)};
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> gz(k_count);

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto t = detail::sample_terms(batch, i, theta, theta_old, ref);
    const double adv = batch.advantages[i];
    const auto a = static_cast<std::size_t>(batch.actions[i]);
    std::fill(gz.begin(), gz.end(), 0.0);

    const double clipped = std::clamp(t.ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    if (t.ratio * adv <= clipped * adv) {
      // d rho / d z = rho * (e_a - p)
      for (std::size_t k = 0; k < k_count; ++k) {
        gz[k] -= adv * t.ratio * std::exp(t.log_p[k]);
      }
      gz[a] += adv * t.ratio;
    }

    if (cfg.kl_beta > 0.0) {
      // d KL / d z_j = p_j (l_j - KL), l = log p - log q
      double kl = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) kl += std::exp(t.log_p[k]) * (t.log_p[k] - t.log_ref[k]);
      for (std::size_t k = 0; k < k_count; ++k) {
        gz[k] -= cfg.kl_beta * std::exp(t.log_p[k]) * ((t.log_p[k] - t.log_ref[k]) - kl);
      }
    }

    const auto& x = batch.contexts[i];
    for (std::size_t f = 0; f < x.size(); ++f) {
      double* row = grad.weights.data() + f * k_count;
      for (std::size_t k = 0; k < k_count; ++k) row[k] += inv_n * x[f] * gz[k];
    }
    for (std::size_t k = 0; k < k_count; ++k) grad.bias[k] += inv_n * gz[k];
  }
  return grad;
}

}  // namespace noisygrpo
