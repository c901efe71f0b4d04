// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0
//
// Rule-based rewards: answer accuracy (exact match or thresholded embedding
// similarity) and a <think>...</think> format check, summed into the
// semantic reward.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noisygrpo/error.hpp"

namespace noisygrpo {

enum class AnswerKind { YesNo, MultipleChoice, OpenEnded };

/// Text embedding service. Implementations return unit-norm vectors of a
/// fixed dimension and must be safe for concurrent const use.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

/// Lowercased whitespace tokens hashed (FNV-1a) into a fixed number of
/// buckets, then L2-normalized.
class HashedBagOfWordsEmbedder final : public Embedder {
 public:
  explicit HashedBagOfWordsEmbedder(std::size_t dimension = 256) : dim_(dimension) {
    detail::require(dim_ > 0, "embedder dimension must be positive");
  }

  std::size_t dimension() const override { return dim_; }

  std::vector<double> embed(std::string_view text) const override {
    std::vector<double> v(dim_, 0.0);
    std::size_t i = 0;
    bool any = false;
    while (i < text.size()) {
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      const std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      if (i > start) {
        v[fnv1a(text.substr(start, i - start)) % dim_] += 1.0;
        any = true;
      }
    }
    detail::require(any, "embed: text has no tokens");
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
  }

 private:
  static std::uint64_t fnv1a(std::string_view token) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : token) {
      h ^= static_cast<std::uint8_t>(std::tolower(static_cast<unsigned char>(c)));
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::size_t dim_;
};

struct AnswerSpec {
  AnswerKind kind = AnswerKind::OpenEnded;
  std::string ground_truth;

  void validate() const;
};

struct RewardConfig {
  double tau = 0.6;
  double format_weight = 1.0;
  std::shared_ptr<const Embedder> embedder = std::make_shared<HashedBagOfWordsEmbedder>();

  void validate() const {
    detail::require(tau > 0.0 && tau < 1.0, "RewardConfig: tau must be in (0, 1)");
    detail::require(format_weight >= 0.0 && std::isfinite(format_weight),
                    "RewardConfig: format_weight must be >= 0");
    detail::require(embedder != nullptr, "RewardConfig: embedder missing");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
}

inline std::size_t count_of(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";

}  // namespace detail

/// Lowercase, trim, strip trailing punctuation.
inline std::string canonicalize(std::string_view text) {
  std::string s(detail::trim(text));
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  while (!s.empty() && (detail::is_trailing_punct(s.back()) ||
                        std::isspace(static_cast<unsigned char>(s.back())))) {
    s.pop_back();
  }
  return s;
}

/// Leading option letter of a multiple-choice answer ("b", "(b) cat", "b. cat").
inline std::optional<char> option_letter(std::string_view canonical) {
  std::string_view s = canonical;
  if (!s.empty() && s.front() == '(') s.remove_prefix(1);
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return std::nullopt;
  if (s.size() == 1) return s.front();
  const char next = s[1];
  if (next == ')' || next == '.' || next == ':' || std::isspace(static_cast<unsigned char>(next))) {
    return s.front();
  }
  return std::nullopt;
}

/// Text after the closing think tag, or the whole completion when absent.
inline std::string extract_answer(std::string_view completion) {
  const auto pos = completion.rfind(detail::kThinkClose);
  if (pos == std::string_view::npos) return std::string(detail::trim(completion));
  return std::string(detail::trim(completion.substr(pos + detail::kThinkClose.size())));
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  detail::require(a.size() == b.size(), "cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

inline void AnswerSpec::validate() const {
  const std::string truth = canonicalize(ground_truth);
  detail::require(!truth.empty(), "AnswerSpec: empty ground truth");
  if (kind == AnswerKind::YesNo) {
    detail::require(truth == "yes" || truth == "no", "AnswerSpec: yes/no ground truth must be yes or no");
  }
}

inline double accuracy_reward(std::string_view prediction, const AnswerSpec& spec,
                              const RewardConfig& cfg) {
  spec.validate();
  const std::string pred = canonicalize(prediction);
  const std::string truth = canonicalize(spec.ground_truth);
  if (pred.empty() || truth.empty()) return 0.0;

  switch (spec.kind) {
    case AnswerKind::YesNo:
      return pred == truth ? 1.0 : 0.0;
    case AnswerKind::MultipleChoice: {
      const auto lp = option_letter(pred);
      const auto lt = option_letter(truth);
      if (lp && lt) return *lp == *lt ? 1.0 : 0.0;
      return pred == truth ? 1.0 : 0.0;
    }
    case AnswerKind::OpenEnded: {
      const double s = std::min(
          1.0, cosine_similarity(cfg.embedder->embed(pred), cfg.embedder->embed(truth)));
      return s >= cfg.tau ? s : 0.0;
    }
  }
  return 0.0;
}

/// 1 iff there is exactly one <think>...</think> span with non-empty
/// reasoning followed by a non-empty answer.
inline double format_reward(std::string_view completion) {
  using detail::kThinkClose;
  using detail::kThinkOpen;
  if (detail::count_of(completion, kThinkOpen) != 1 ||
      detail::count_of(completion, kThinkClose) != 1) {
    return 0.0;
  }
  const auto open = completion.find(kThinkOpen);
  const auto close = completion.find(kThinkClose);
  if (close < open) return 0.0;
  const auto inner = completion.substr(open + kThinkOpen.size(), close - open - kThinkOpen.size());
  const auto tail = completion.substr(close + kThinkClose.size());
  return detail::trim(inner).empty() || detail::trim(tail).empty() ? 0.0 : 1.0;
}

inline double semantic_reward(std::string_view completion, const AnswerSpec& spec,
                              const RewardConfig& cfg) {
  cfg.validate();
  return accuracy_reward(extract_answer(completion), spec, cfg) +
         cfg.format_weight * format_reward(completion);
}

}  // namespace noisygrpo
