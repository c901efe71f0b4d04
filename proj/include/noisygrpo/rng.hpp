// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded random streams. Every consumer (a rollout group, the eval set, a
// noising call) derives its own engine from an experiment seed plus a tuple
// of integer tags, so results never depend on evaluation order.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace noisygrpo {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Mixes a seed and a list of tags into a single 64-bit stream key.
constexpr std::uint64_t stream_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = detail::splitmix64(seed);
  for (auto t : tags) h = detail::splitmix64(h ^ detail::splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags = {}) {
  return Rng(stream_key(seed, tags));
}

// Purpose tags for derived streams.
enum class StreamTag : std::uint64_t {
  kLabeling = 1,
  kInit = 2,
  kEval = 3,
  kGroup = 4,
  kSubsample = 5,
};

constexpr std::uint64_t tag(StreamTag t) noexcept { return static_cast<std::uint64_t>(t); }

}  // namespace noisygrpo
