// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Group-wise normalization shared by every advantage estimator.
//
// Conventions:
//  - std is the population standard deviation (divide by G).
//  - A group whose std is below kDegenerateStd normalizes to all zeros.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "noisygrpo/error.hpp"

namespace noisygrpo {

inline constexpr double kDegenerateStd = 1e-8;

namespace detail {

inline void check_group(std::span<const double> values, const char* who) {
  require(!values.empty(), std::string(who) + ": empty group");
  for (double v : values) {
    require(std::isfinite(v), std::string(who) + ": non-finite entry");
  }
}

}  // namespace detail

/// Fixed-length group of finite scalars, G >= 2.
class ScalarGroup {
 public:
  explicit ScalarGroup(std::vector<double> values) : values_(std::move(values)) {
    detail::require(values_.size() >= 2, "ScalarGroup: group size must be at least 2");
    detail::check_group(values_, "ScalarGroup");
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }  // NOLINT

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

 private:
  std::vector<double> values_;
};

inline double group_mean(std::span<const double> values) {
  detail::check_group(values, "group_mean");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

inline double group_std(std::span<const double> values) {
  detail::check_group(values, "group_std");
  const double mean = group_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

/// (x - mean) / std per entry; all zeros when the group is degenerate.
inline std::vector<double> normalize(std::span<const double> values) {
  detail::check_group(values, "normalize");
  const double mean = group_mean(values);
  const double sd = group_std(values);
  std::vector<double> out(values.size(), 0.0);
  if (sd < kDegenerateStd) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

inline ScalarGroup normalize(const ScalarGroup& g) {
  return ScalarGroup(normalize(g.values()));
}

}  // namespace noisygrpo
