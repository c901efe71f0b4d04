// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat `key = value` experiment configs. Blank lines and lines starting with
// '#' are ignored. `method` selects the defaults every other key overrides.

#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "noisygrpo/error.hpp"
#include "noisygrpo/reward.hpp"
#include "noisygrpo/trainer.hpp"

namespace noisygrpo {

inline constexpr std::array<std::string_view, 25> kConfigKeys = {
    "method",          "iterations",     "groups_per_iteration", "group_size",
    "inner_epochs",    "learning_rate",  "temperature",          "init_scale",
    "eval_tasks",      "diffusion_steps", "seed",                "feature_dim",
    "num_answers",     "alpha",          "gamma",                "advantage_mode",
    "clip_eps",        "kl_beta",        "sampler",              "sampler_upper",
    "sampler_mean",    "sampler_variance", "sampler_value",      "tau",
    "format_weight",
};

inline std::string valid_config_keys() {
  std::string s;
  for (auto k : kConfigKeys) {
    if (!s.empty()) s += ", ";
    s += k;
  }
  return s;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw InvalidInput("config key '" + key + "': '" + v + "' is not a number");
  return out;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw InvalidInput("config key '" + key + "': '" + v + "' is not an integer");
  return out;
}

}  // namespace detail

/// Reads raw key/value pairs, rejecting unknown or repeated keys.
inline std::map<std::string, std::string> read_config_pairs(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key(detail::trim(body.substr(0, eq)));
    std::string value(detail::trim(body.substr(eq + 1)));
    bool known = false;
    for (auto k : kConfigKeys) known = known || k == key;
    if (!known) {
      throw InvalidInput("config line " + std::to_string(lineno) + ": unknown key '" + key +
                         "'; valid keys: " + valid_config_keys());
    }
    if (!kv.emplace(key, value).second) {
      throw InvalidInput("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

inline ExperimentConfig parse_experiment_config(std::istream& in) {
  auto kv = read_config_pairs(in);
  auto take = [&kv](const char* key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  const Method method = parse_method(take("method").value_or("NoisyGRPO"));
  ExperimentConfig cfg = make_experiment_config(method);

  auto set_int = [&](const char* key, auto& field) {
    if (auto v = take(key)) field = static_cast<std::decay_t<decltype(field)>>(detail::parse_int(key, *v));
  };
  auto set_double = [&](const char* key, double& field) {
    if (auto v = take(key)) field = detail::parse_double(key, *v);
  };

  set_int("iterations", cfg.iterations);
  set_int("groups_per_iteration", cfg.groups_per_iteration);
  set_int("group_size", cfg.group_size);
  set_int("inner_epochs", cfg.inner_epochs);
  set_double("learning_rate", cfg.learning_rate);
  set_double("temperature", cfg.temperature);
  set_double("init_scale", cfg.init_scale);
  set_int("eval_tasks", cfg.eval_tasks);
  set_int("diffusion_steps", cfg.diffusion_steps);
  if (auto v = take("seed")) {
    const auto s = detail::parse_int("seed", *v);
    detail::require(s >= 0, "config key 'seed' must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  set_int("feature_dim", cfg.env.feature_dim);
  set_int("num_answers", cfg.env.num_answers);
  set_double("alpha", cfg.advantage.alpha);
  set_double("gamma", cfg.advantage.gamma);
  if (auto v = take("advantage_mode")) cfg.advantage.mode = parse_advantage_mode(*v);
  set_double("clip_eps", cfg.surrogate.clip_eps);
  set_double("kl_beta", cfg.surrogate.kl_beta);
  set_double("tau", cfg.reward.tau);
  set_double("format_weight", cfg.reward.format_weight);

  const auto kind = take("sampler");
  if (kind) {
    if (*kind == "uniform") {
      UniformLevels u;
      set_double("sampler_upper", u.upper);
      cfg.sampler = u;
    } else if (*kind == "gaussian") {
      GaussianLevels g;
      set_double("sampler_mean", g.mean);
      set_double("sampler_variance", g.variance);
      cfg.sampler = g;
    } else if (*kind == "fixed") {
      FixedLevel f;
      set_double("sampler_value", f.value);
      cfg.sampler = f;
    } else {
      throw InvalidInput("config key 'sampler': expected uniform, gaussian or fixed, got '" + *kind + "'");
    }
  }
  const std::map<std::string, std::string> owner = {{"sampler_upper", "uniform"},
                                                    {"sampler_mean", "gaussian"},
                                                    {"sampler_variance", "gaussian"},
                                                    {"sampler_value", "fixed"}};
  for (const auto& [key, sampler_kind] : owner) {
    if (kv.count(key) && kind != sampler_kind) {
      throw InvalidInput("config key '" + key + "' only applies to sampler = " + sampler_kind);
    }
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path + "'");
  return parse_experiment_config(in);
}

}  // namespace noisygrpo
