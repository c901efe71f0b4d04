// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "noisygrpo/bayes_advantage.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace noisygrpo;

namespace {

const RewardedGroup kExample{{0.1, 0.4, 0.6, 0.9}, {0.9, 0.7, 0.3, 0.1}};

RewardedGroup random_group(std::mt19937_64& rng, std::size_t g) {
  return {testutil::uniform_vec(rng, g, 0.0, 1.0), testutil::uniform_vec(rng, g, 0.0, 2.0)};
}

}  // namespace

TEST(BayesAdvantage, WorkedExample) {
  const auto rep = estimate_advantages(kExample, {0.1, 0.01, AdvantageMode::FullNoisy});
  const std::vector<double> prior{1.37198868, 0.34299717, -0.34299717, -1.37198868};
  const std::vector<double> obs{1.26491106, 0.63245553, -0.63245553, -1.26491106};
  const std::vector<double> post{1.32099934, 0.48083449, -0.48083449, -1.32099934};
  const std::vector<double> adv{1.32891633, 0.48371622, -0.48371622, -1.32891633};
  EXPECT_LT(testutil::max_abs_diff(rep.prior_normed, prior), 1e-8);
  EXPECT_LT(testutil::max_abs_diff(rep.obs_normed, obs), 1e-8);
  EXPECT_LT(testutil::max_abs_diff(rep.posterior, post), 1e-8);
  EXPECT_LT(testutil::max_abs_diff(rep.advantages, adv), 1e-8);
  EXPECT_NEAR(rep.sigma_n_sq, 1.0 / 11.0, 1e-12);
  EXPECT_DOUBLE_EQ(rep.sigma_s_sq, 0.1);
  EXPECT_NEAR(rep.importance_weight, 11.0 / 21.0, 1e-12);
}

TEST(BayesAdvantage, NaiveModeUsesEqualWeights) {
  const auto rep = estimate_advantages(kExample, {0.1, 0.01, AdvantageMode::NaiveNoisy});
  EXPECT_DOUBLE_EQ(rep.sigma_s_sq, rep.sigma_n_sq);
  EXPECT_DOUBLE_EQ(rep.importance_weight, 0.5);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(rep.posterior[i], 0.5 * (rep.prior_normed[i] + rep.obs_normed[i]), 1e-15);
  }
}

TEST(BayesAdvantage, VanillaModeIgnoresNoise) {
  const auto rep = estimate_advantages(kExample, {0.1, 0.01, AdvantageMode::VanillaGRPO});
  EXPECT_EQ(rep.advantages, rep.obs_normed);
  EXPECT_EQ(rep.importance_weight, 0.0);
}

TEST(BayesAdvantage, PriorReward) {
  EXPECT_EQ(prior_reward(0.0), 1.0);
  EXPECT_EQ(prior_reward(1.0), 0.0);
  EXPECT_DOUBLE_EQ(prior_reward(0.25), 0.75);
  EXPECT_THROW(prior_reward(-0.01), InvalidInput);
  EXPECT_THROW(prior_reward(1.01), InvalidInput);
}

TEST(BayesAdvantage, PriorVarianceFromRawStd) {
  // std of {0, 2} is 1
  EXPECT_DOUBLE_EQ(prior_variance(std::vector<double>{0.0, 2.0}, 0.01), 0.01 / 1.01);
  EXPECT_DOUBLE_EQ(prior_variance(std::vector<double>{1.0, 1.0}, 0.5), 1.0);
}

TEST(BayesAdvantage, InvalidInputs) {
  const AdvantageParams p;
  EXPECT_THROW(estimate_advantages({{0.1}, {1.0}}, p), InvalidInput);
  EXPECT_THROW(estimate_advantages({{0.1, 0.2}, {1.0}}, p), InvalidInput);
  EXPECT_THROW(estimate_advantages({{0.1, 1.2}, {1.0, 0.0}}, p), InvalidInput);
  EXPECT_THROW(estimate_advantages(kExample, {0.0, 0.01}), InvalidInput);
  EXPECT_THROW(estimate_advantages(kExample, {0.1, -1.0}), InvalidInput);
  EXPECT_THROW(parse_advantage_mode("bogus"), InvalidInput);
  EXPECT_EQ(parse_advantage_mode("naive"), AdvantageMode::NaiveNoisy);
}

TEST(BayesAdvantageProperty, MatchesOracle) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(2, 16);
  std::uniform_real_distribution<double> alpha(1e-3, 10.0), gamma(1e-4, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto g = random_group(rng, static_cast<std::size_t>(size(rng)));
    const double a = alpha(rng), c = gamma(rng);
    const auto got = estimate_advantages(g, {a, c, AdvantageMode::FullNoisy});
    const auto want = oracle::full_noisy(g.noise_levels, g.semantic_rewards, a, c);
    EXPECT_LT(testutil::max_abs_diff(got.advantages, want.advantages), 1e-9);
    EXPECT_NEAR(got.importance_weight, want.weight, 1e-12);
  }
}

TEST(BayesAdvantageProperty, ConstantNoiseReducesToVanilla) {
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<int> size(2, 16);
  std::uniform_real_distribution<double> level(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto g_size = static_cast<std::size_t>(size(rng));
    RewardedGroup g{std::vector<double>(g_size, level(rng)),
                    testutil::uniform_vec(rng, g_size, 0.0, 2.0)};
    const auto full = estimate_advantages(g, {0.1, 0.01, AdvantageMode::FullNoisy});
    const auto van = estimate_advantages(g, {0.1, 0.01, AdvantageMode::VanillaGRPO});
    EXPECT_LT(testutil::max_abs_diff(full.advantages, van.advantages), 1e-9);
  }
}

TEST(BayesAdvantageProperty, ConstantRewardReducesToPrior) {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> size(2, 16);
  std::uniform_real_distribution<double> reward(0.0, 2.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto g_size = static_cast<std::size_t>(size(rng));
    RewardedGroup g{testutil::uniform_vec(rng, g_size, 0.0, 1.0),
                    std::vector<double>(g_size, reward(rng))};
    const auto full = estimate_advantages(g, {0.1, 0.01, AdvantageMode::FullNoisy});
    std::vector<double> prior(g_size);
    for (std::size_t i = 0; i < g_size; ++i) prior[i] = 1.0 - g.noise_levels[i];
    EXPECT_LT(testutil::max_abs_diff(full.advantages, oracle::norm(prior)), 1e-9);
  }
}

TEST(BayesAdvantageProperty, WeightMonotoneInRewardSpread) {
  // Larger observed spread lowers the prior variance, raising the prior's share.
  double last = 0.0;
  for (double spread : {0.01, 0.05, 0.1, 0.5, 1.0, 2.0}) {
    const RewardedGroup g{{0.2, 0.8}, {0.0, spread}};
    const auto rep = estimate_advantages(g, {0.1, 0.01, AdvantageMode::FullNoisy});
    EXPECT_GT(rep.importance_weight, last);
    EXPECT_LT(rep.importance_weight, 1.0);
    last = rep.importance_weight;
  }
}

TEST(BayesAdvantageProperty, PosteriorLiesBetweenPriorAndObservation) {
  std::mt19937_64 rng(104);
  for (int rep = 0; rep < 500; ++rep) {
    const auto g = random_group(rng, 6);
    const auto r = estimate_advantages(g, {0.1, 0.01, AdvantageMode::FullNoisy});
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double lo = std::min(r.prior_normed[i], r.obs_normed[i]);
      const double hi = std::max(r.prior_normed[i], r.obs_normed[i]);
      EXPECT_GE(r.posterior[i], lo - 1e-12);
      EXPECT_LE(r.posterior[i], hi + 1e-12);
    }
  }
}

TEST(BayesAdvantageProperty, ConcordantOrderingPreserved) {
  // Prior and observation rank the rollouts the same way.
  std::mt19937_64 rng(105);
  for (int rep = 0; rep < 200; ++rep) {
    auto g = random_group(rng, 8);
    std::sort(g.noise_levels.begin(), g.noise_levels.end());
    std::sort(g.semantic_rewards.begin(), g.semantic_rewards.end(), std::greater<>());
    const auto r = estimate_advantages(g, {0.1, 0.01, AdvantageMode::FullNoisy});
    EXPECT_TRUE(std::is_sorted(r.advantages.begin(), r.advantages.end(), std::greater_equal<>()));
  }
}
