// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Wire formats: JSONL rollout-group input records, JSONL advantage records
// (written by `advantages` and as the training group log), and the metric
// CSV/JSON series.

#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisygrpo/bayes_advantage.hpp"
#include "noisygrpo/error.hpp"
#include "noisygrpo/surrogate.hpp"
#include "noisygrpo/trainer.hpp"

namespace noisygrpo {

using Json = nlohmann::json;

inline constexpr int kRecordVersion = 1;

/// One input line: {"group_id": 3, "rollouts": [{"noise_level": 0.1,
/// "semantic_reward": 2.0, "completion": "..."}, ...]}
struct RolloutGroupRecord {
  std::int64_t group_id = 0;
  RewardedGroup group;
  std::vector<std::optional<std::string>> completions;
};

namespace detail {

inline double number_field(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw FormatError(std::string("field '") + key + "' is not a number");
  return it->get<double>();
}

inline std::vector<double> number_array(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) {
    throw FormatError(std::string("missing array field '") + key + "'");
  }
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw FormatError(std::string("array '") + key + "' has a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses and validates one input line. Throws FormatError or InvalidInput.
inline RolloutGroupRecord parse_rollout_group(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("record is not a JSON object");
  RolloutGroupRecord rec;
  const auto gid = j.find("group_id");
  if (gid == j.end() || !gid->is_number_integer()) throw FormatError("missing integer field 'group_id'");
  rec.group_id = gid->get<std::int64_t>();
  const auto ro = j.find("rollouts");
  if (ro == j.end() || !ro->is_array()) throw FormatError("missing array field 'rollouts'");
  for (const auto& r : *ro) {
    if (!r.is_object()) throw FormatError("rollout entry is not an object");
    rec.group.noise_levels.push_back(detail::number_field(r, "noise_level"));
    rec.group.semantic_rewards.push_back(detail::number_field(r, "semantic_reward"));
    const auto c = r.find("completion");
    if (c != r.end() && !c->is_null()) {
      if (!c->is_string()) throw FormatError("field 'completion' is not a string");
      rec.completions.emplace_back(c->get<std::string>());
    } else {
      rec.completions.emplace_back(std::nullopt);
    }
  }
  rec.group.validate();
  return rec;
}

inline Json rollout_group_json(std::int64_t group_id, const RewardedGroup& g) {
  Json rollouts = Json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    rollouts.push_back({{"noise_level", g.noise_levels[i]}, {"semantic_reward", g.semantic_rewards[i]}});
  }
  return {{"group_id", group_id}, {"rollouts", std::move(rollouts)}};
}

/// Advantage record; also the per-group training log line.
inline Json advantage_record_json(std::int64_t group_id, const RewardedGroup& g,
                                  const AdvantageReport& rep,
                                  std::optional<int> iteration = std::nullopt) {
  Json j;
  j["version"] = kRecordVersion;
  j["group_id"] = group_id;
  if (iteration) j["iteration"] = *iteration;
  j["mode"] = std::string(to_string(rep.mode));
  j["advantages"] = rep.advantages;
  j["importance_weight"] = rep.importance_weight;
  j["sigma_n_sq"] = rep.sigma_n_sq;
  j["sigma_s_sq"] = rep.sigma_s_sq;
  j["prior_normed"] = rep.prior_normed;
  j["obs_normed"] = rep.obs_normed;
  j["posterior"] = rep.posterior;
  j["noise_levels"] = g.noise_levels;
  j["semantic_rewards"] = g.semantic_rewards;
  return j;
}

struct AdvantageRecord {
  std::int64_t group_id = 0;
  std::optional<int> iteration;
  RewardedGroup group;
  AdvantageReport report;
};

inline AdvantageRecord parse_advantage_record(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("record is not a JSON object");
  AdvantageRecord rec;
  const auto gid = j.find("group_id");
  if (gid == j.end() || !gid->is_number_integer()) throw FormatError("missing integer field 'group_id'");
  rec.group_id = gid->get<std::int64_t>();
  if (const auto it = j.find("iteration"); it != j.end() && it->is_number_integer()) {
    rec.iteration = it->get<int>();
  }
  const auto mode = j.find("mode");
  if (mode == j.end() || !mode->is_string()) throw FormatError("missing string field 'mode'");
  try {
    rec.report.mode = parse_advantage_mode(mode->get<std::string>());
  } catch (const InvalidInput& e) {
    throw FormatError(e.what());
  }
  rec.report.advantages = detail::number_array(j, "advantages");
  rec.report.importance_weight = detail::number_field(j, "importance_weight");
  rec.report.sigma_n_sq = detail::number_field(j, "sigma_n_sq");
  rec.report.sigma_s_sq = detail::number_field(j, "sigma_s_sq");
  rec.report.prior_normed = detail::number_array(j, "prior_normed");
  rec.report.obs_normed = detail::number_array(j, "obs_normed");
  rec.report.posterior = detail::number_array(j, "posterior");
  rec.group.noise_levels = detail::number_array(j, "noise_levels");
  rec.group.semantic_rewards = detail::number_array(j, "semantic_rewards");
  const auto g = rec.group.size();
  if (rec.group.semantic_rewards.size() != g || rec.report.advantages.size() != g ||
      rec.report.prior_normed.size() != g || rec.report.obs_normed.size() != g ||
      rec.report.posterior.size() != g) {
    throw FormatError("advantage record arrays differ in length");
  }
  return rec;
}

// -- metric series ----------------------------------------------------------------

inline constexpr const char* kMetricCsvHeader =
    "iteration,method,seed,acc_reward,reward_std,imp_weight_mean,imp_weight_var,eval_acc";

inline void write_metrics_csv(std::ostream& out, Method method, std::uint64_t seed,
                              const std::vector<MetricRecord>& metrics) {
  out << kMetricCsvHeader << '\n';
  for (const auto& m : metrics) {
    out << m.iteration << ',' << to_string(method) << ',' << seed << ','
        << detail::fmt17(m.mean_accuracy_reward) << ',' << detail::fmt17(m.reward_std) << ','
        << detail::fmt17(m.mean_importance_weight) << ','
        << detail::fmt17(m.importance_weight_variance) << ',' << detail::fmt17(m.eval_accuracy)
        << '\n';
  }
}

inline Json metrics_json(Method method, std::uint64_t seed, const std::vector<MetricRecord>& metrics) {
  Json series = Json::array();
  for (const auto& m : metrics) {
    series.push_back({{"iteration", m.iteration},
                      {"acc_reward", m.mean_accuracy_reward},
                      {"reward_std", m.reward_std},
                      {"imp_weight_mean", m.mean_importance_weight},
                      {"imp_weight_var", m.importance_weight_variance},
                      {"eval_acc", m.eval_accuracy}});
  }
  return {{"version", kRecordVersion},
          {"method", std::string(to_string(method))},
          {"seed", seed},
          {"metrics", std::move(series)}};
}

inline Json policy_json(const PolicySnapshot& p) {
  return {{"version", kRecordVersion},
          {"feature_dim", p.feature_dim},
          {"num_actions", p.num_actions},
          {"weights", p.weights},
          {"bias", p.bias}};
}

inline PolicySnapshot parse_policy_json(const Json& j) {
  try {
    PolicySnapshot p(j.at("feature_dim").get<int>(), j.at("num_actions").get<int>());
    p.weights = j.at("weights").get<std::vector<double>>();
    p.bias = j.at("bias").get<std::vector<double>>();
    if (p.weights.size() != static_cast<std::size_t>(p.feature_dim) * p.num_actions ||
        p.bias.size() != static_cast<std::size_t>(p.num_actions)) {
      throw FormatError("policy arrays do not match its dimensions");
    }
    return p;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("invalid policy file: ") + e.what());
  }
}

}  // namespace noisygrpo
