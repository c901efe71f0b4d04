// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "noisygrpo/group_stats.hpp"
#include "test_util.hpp"

using namespace noisygrpo;

TEST(GroupStats, NormalizeThreeValues) {
  const std::vector<double> x{1, 2, 3};
  const auto z = normalize(x);
  ASSERT_EQ(z.size(), 3u);
  EXPECT_NEAR(z[0], -1.224744871391589, 1e-12);
  EXPECT_NEAR(z[1], 0.0, 1e-15);
  EXPECT_NEAR(z[2], 1.224744871391589, 1e-12);
}

TEST(GroupStats, PopulationStd) {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(group_mean(x), 5.0);
  EXPECT_DOUBLE_EQ(group_std(x), 2.0);
}

TEST(GroupStats, ConstantGroupIsAllZero) {
  const std::vector<double> x{0.7, 0.7, 0.7, 0.7};
  for (double v : normalize(x)) EXPECT_EQ(v, 0.0);
}

TEST(GroupStats, TinySpreadCountsAsDegenerate) {
  const std::vector<double> x{1.0, 1.0 + 1e-10};
  for (double v : normalize(x)) EXPECT_EQ(v, 0.0);
}

TEST(GroupStats, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(normalize(std::vector<double>{}), InvalidInput);
  EXPECT_THROW(normalize(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()}),
               InvalidInput);
  EXPECT_THROW(group_std(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}),
               InvalidInput);
}

TEST(GroupStats, ScalarGroupNeedsTwoEntries) {
  EXPECT_THROW(ScalarGroup(std::vector<double>{1.0}), InvalidInput);
  const auto z = normalize(ScalarGroup(std::vector<double>{3.0, 1.0}));
  EXPECT_NEAR(z.values()[0], 1.0, 1e-15);
  EXPECT_NEAR(z.values()[1], -1.0, 1e-15);
}

TEST(GroupStatsProperty, ZeroMeanUnitStd) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(2, 32);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto x = testutil::uniform_vec(rng, static_cast<std::size_t>(size(rng)), -5.0, 5.0);
    const auto z = normalize(x);
    EXPECT_NEAR(group_mean(z), 0.0, 1e-12);
    EXPECT_NEAR(group_std(z), 1.0, 1e-12);
  }
}

TEST(GroupStatsProperty, AffineInvariance) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> scale(0.01, 100.0), shift(-50.0, 50.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto x = testutil::uniform_vec(rng, 8, 0.0, 1.0);
    const double a = scale(rng), b = shift(rng);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    EXPECT_LT(testutil::max_abs_diff(normalize(x), normalize(y)), 1e-9);
  }
}

TEST(GroupStatsProperty, PreservesOrder) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 500; ++rep) {
    const auto x = testutil::uniform_vec(rng, 10, -1.0, 1.0);
    const auto z = normalize(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[i] < x[j]) EXPECT_LT(z[i], z[j]);
      }
    }
  }
}
