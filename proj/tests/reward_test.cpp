// Copyright (c) 2026, The noisygrpo authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <string>

#include "noisygrpo/reward.hpp"

using namespace noisygrpo;

namespace {

// "truth" embeds to e0; a decimal c embeds to (c, sqrt(1 - c^2)), so its
// cosine with "truth" is exactly c.
class ControlledEmbedder final : public Embedder {
 public:
  std::size_t dimension() const override { return 2; }
  std::vector<double> embed(std::string_view text) const override {
    if (text == "truth") return {1.0, 0.0};
    const double c = std::stod(std::string(text));
    return {c, std::sqrt(1.0 - c * c)};
  }
};

RewardConfig controlled(double tau) {
  RewardConfig cfg;
  cfg.tau = tau;
  cfg.embedder = std::make_shared<ControlledEmbedder>();
  return cfg;
}

const RewardConfig kDefault;

}  // namespace

TEST(Reward, YesNoExactMatch) {
  const AnswerSpec yes{AnswerKind::YesNo, "yes"};
  EXPECT_EQ(accuracy_reward("yes", yes, kDefault), 1.0);
  EXPECT_EQ(accuracy_reward("no", yes, kDefault), 0.0);
  EXPECT_EQ(accuracy_reward("  Yes. ", yes, kDefault), 1.0);
  EXPECT_EQ(accuracy_reward("", yes, kDefault), 0.0);
}

TEST(Reward, MultipleChoiceLetters) {
  const AnswerSpec b{AnswerKind::MultipleChoice, "B"};
  EXPECT_EQ(accuracy_reward("b", b, kDefault), 1.0);
  EXPECT_EQ(accuracy_reward("(B) a cat", b, kDefault), 1.0);
  EXPECT_EQ(accuracy_reward("b. a cat", b, kDefault), 1.0);
  EXPECT_EQ(accuracy_reward("c", b, kDefault), 0.0);
  const AnswerSpec text{AnswerKind::MultipleChoice, "answer-2"};
  EXPECT_EQ(accuracy_reward("answer-2", text, kDefault), 1.0);
  EXPECT_EQ(accuracy_reward("answer-3", text, kDefault), 0.0);
}

TEST(Reward, OpenEndedIdenticalTextScoresOne) {
  const AnswerSpec spec{AnswerKind::OpenEnded, "a red bus parked near the station"};
  EXPECT_NEAR(accuracy_reward("A red bus parked near the station.", spec, kDefault), 1.0, 1e-12);
}

TEST(Reward, OpenEndedUnrelatedTextScoresZero) {
  const AnswerSpec spec{AnswerKind::OpenEnded, "a red bus parked near the station"};
  EXPECT_EQ(accuracy_reward("seven green kites", spec, kDefault), 0.0);
}

TEST(Reward, ThresholdSweep) {
  const AnswerSpec spec{AnswerKind::OpenEnded, "truth"};
  for (double tau : {0.3, 0.6, 0.9}) {
    const auto cfg = controlled(tau);
    for (int i = 0; i <= 100; ++i) {
      const double c = i / 100.0;
      const double r = accuracy_reward(std::to_string(c), spec, cfg);
      if (c < tau - 1e-9) {
        EXPECT_EQ(r, 0.0) << "c=" << c << " tau=" << tau;
      } else if (c > tau + 1e-9) {
        EXPECT_NEAR(r, c, 1e-6) << "c=" << c << " tau=" << tau;
      }
    }
  }
}

TEST(Reward, FormatExamples) {
  EXPECT_EQ(format_reward("<think>step A</think>yes"), 1.0);
  EXPECT_EQ(format_reward("yes"), 0.0);
  EXPECT_EQ(format_reward("<think></think>yes"), 0.0);
  EXPECT_EQ(format_reward("<think>  </think>yes"), 0.0);
  EXPECT_EQ(format_reward("<think>a</think>"), 0.0);
  EXPECT_EQ(format_reward("</think>a<think>b"), 0.0);
  EXPECT_EQ(format_reward("<think>a</think><think>b</think>yes"), 0.0);
}

TEST(Reward, SemanticCombination) {
  const AnswerSpec yes{AnswerKind::YesNo, "yes"};
  EXPECT_EQ(semantic_reward("<think>look</think>yes", yes, kDefault), 2.0);
  EXPECT_EQ(semantic_reward("yes", yes, kDefault), 1.0);
  EXPECT_EQ(semantic_reward("<think>look</think>no", yes, kDefault), 1.0);
  RewardConfig half;
  half.format_weight = 0.5;
  EXPECT_EQ(semantic_reward("<think>look</think>yes", yes, half), 1.5);
}

TEST(Reward, AnswerExtraction) {
  EXPECT_EQ(extract_answer("<think>x</think>  B  "), "B");
  EXPECT_EQ(extract_answer("no tags here "), "no tags here");
  EXPECT_EQ(extract_answer("<think>x</think>a</think>b"), "b");
}

TEST(Reward, CanonicalizeIdempotent) {
  for (const char* s : {"  Yes. ", "B)", "Hello, World!!", "", "...", "(a) Cat?", "MiXeD cAsE ;"}) {
    const auto once = canonicalize(s);
    EXPECT_EQ(canonicalize(once), once) << s;
  }
  EXPECT_EQ(canonicalize("  Yes!. "), "yes");
}

TEST(Reward, BoundsHold) {
  const AnswerSpec spec{AnswerKind::OpenEnded, "the quick brown fox"};
  for (const char* c : {"<think>r</think>the quick brown fox", "<think>r</think>quick fox",
                        "brown", "<think></think>", "nothing at all"}) {
    const double acc = accuracy_reward(extract_answer(c), spec, kDefault);
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 1.0);
    const double s = semantic_reward(c, spec, kDefault);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 2.0);
  }
}

TEST(Reward, EmbedderUnitNormAndDeterministic) {
  const HashedBagOfWordsEmbedder e;
  const auto a = e.embed("One two two three");
  double n = 0;
  for (double v : a) n += v * v;
  EXPECT_NEAR(n, 1.0, 1e-9);
  EXPECT_EQ(a, e.embed("one TWO two three"));
  EXPECT_THROW(e.embed("   "), InvalidInput);
}

TEST(Reward, SpecValidation) {
  EXPECT_THROW(accuracy_reward("yes", {AnswerKind::YesNo, "maybe"}, kDefault), InvalidInput);
  EXPECT_THROW(accuracy_reward("yes", {AnswerKind::OpenEnded, "  "}, kDefault), InvalidInput);
  RewardConfig bad;
  bad.tau = 1.0;
  EXPECT_THROW(semantic_reward("yes", {AnswerKind::YesNo, "yes"}, bad), InvalidInput);
}
