#include "refrl/reward.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "refrl/rng.hpp"

namespace refrl {
namespace {

const Box kA{0, 0, 10, 10};
const Box kB{20, 0, 30, 10};
const Box kC{40, 0, 50, 10};

ReferringTask grounded_task() {
  ReferringTask t;
  t.task_id = "t000001";
  t.subset = SubsetTag::attribute;
  t.category = "person";
  t.expression = "the tall person";
  t.hints = {{"person 1", kA}, {"person 2", kB}, {"person 3", kC}};
  t.ground_truth = {1, 3};
  return t;
}

ReferringTask rejection_task() {
  ReferringTask t = grounded_task();
  t.task_id = "t000002";
  t.subset = SubsetTag::rejection;
  t.expression = "the purple person";
  t.ground_truth = {};
  return t;
}

// Canonical well-formed response carrying the given boxes (or a rejection).
std::string response_with(const std::vector<LabeledBox>& boxes) {
  const Answer a = boxes.empty() ? Answer::rejection() : Answer::of_boxes(boxes);
  return serialize_response({}, a);
}

TEST(F1Reward, EmptySetConventions) {
  const F1Scores both = f1_reward({}, {});
  EXPECT_EQ(both.precision, 1.0);
  EXPECT_EQ(both.recall, 1.0);
  EXPECT_EQ(both.f1, 1.0);
  const F1Scores no_preds = f1_reward({}, {kA});
  EXPECT_EQ(no_preds.f1, 0.0);
  EXPECT_EQ(no_preds.precision, 0.0);
  const F1Scores no_gts = f1_reward({kA}, {});
  EXPECT_EQ(no_gts.f1, 0.0);
  EXPECT_EQ(no_gts.recall, 0.0);
}

TEST(F1Reward, PerfectUnderPermutation) {
  const F1Scores s = f1_reward({kC, kA, kB}, {kA, kB, kC});
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 1.0);
  EXPECT_EQ(s.f1, 1.0);
}

TEST(F1Reward, PartialCredit) {
  // One of two targets found: p = 1, r = 1/2, f1 = 2/3.
  const F1Scores missing = f1_reward({kA}, {kA, kB});
  EXPECT_EQ(missing.precision, 1.0);
  EXPECT_EQ(missing.recall, 0.5);
  EXPECT_EQ(missing.f1, 2.0 / 3.0);
  // Extra spurious box: p = 1/2, r = 1.
  const F1Scores extra = f1_reward({kA, kB}, {kA});
  EXPECT_EQ(extra.precision, 0.5);
  EXPECT_EQ(extra.recall, 1.0);
  EXPECT_EQ(extra.f1, 2.0 / 3.0);
  // A duplicate does not double-count its target.
  const F1Scores dup = f1_reward({kA, kA}, {kA});
  EXPECT_EQ(dup.precision, 0.5);
  EXPECT_EQ(dup.recall, 1.0);
}

TEST(F1Reward, ExactCopyToleranceBoundary) {
  Box near = kA;
  near.x1 += 5e-7;
  EXPECT_EQ(f1_reward({near}, {kA}).f1, 1.0);
  Box off = kA;
  off.x1 += 1.0;  // high IoU but not a verbatim copy
  EXPECT_EQ(f1_reward({off}, {kA}).f1, 0.0);
}

// Maximum one-to-one match count by brute force over injective assignments.
std::size_t oracle_max_matches(const std::vector<Box>& preds, const std::vector<Box>& gts) {
  std::vector<char> gu(gts.size(), 0);
  std::size_t best = 0;
  auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    best = std::max(best, used);
    if (i == preds.size()) return;
    self(self, i + 1, used);
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gu[j] || !exact_match(preds[i], gts[j], 1e-6)) continue;
      gu[j] = 1;
      self(self, i + 1, used + 1);
      gu[j] = 0;
    }
  };
  rec(rec, 0, 0);
  return best;
}

F1Scores oracle_f1(const std::vector<Box>& preds, const std::vector<Box>& gts) {
  if (preds.empty() && gts.empty()) return {1.0, 1.0, 1.0};
  if (preds.empty() || gts.empty()) return {0.0, 0.0, 0.0};
  const auto m = static_cast<double>(oracle_max_matches(preds, gts));
  const double p = m / static_cast<double>(preds.size());
  const double r = m / static_cast<double>(gts.size());
  return {p, r, (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0};
}

TEST(F1Reward, MatchesOracleOnVocabInstances) {
  const std::vector<Box> vocab{kA, kB, kC};
  auto rng = derive_stream(41, "f1-oracle");
  for (int it = 0; it < 2000; ++it) {
    std::vector<Box> preds, gts;
    const auto np = rng.uniform_int(0, 3);
    const auto ng = rng.uniform_int(0, 3);
    for (std::int64_t i = 0; i < np; ++i) preds.push_back(rng.pick(vocab));
    for (std::int64_t j = 0; j < ng; ++j) gts.push_back(rng.pick(vocab));
    const F1Scores got = f1_reward(preds, gts);
    const F1Scores want = oracle_f1(preds, gts);
    EXPECT_EQ(got.precision, want.precision);
    EXPECT_EQ(got.recall, want.recall);
    EXPECT_EQ(got.f1, want.f1);
  }
}

TEST(FormatReward, AgreesWithValidator) {
  const std::string good = response_with({{"person 1", kA}});
  EXPECT_EQ(format_reward(good), 1.0);
  EXPECT_EQ(format_reward("chat " + good), 0.0);
  EXPECT_EQ(format_reward(""), 0.0);
  auto rng = derive_stream(42, "fmt-agree");
  for (int it = 0; it < 200; ++it) {
    std::string raw = good;
    if (rng.bernoulli(0.5)) raw.erase(raw.find("</answer>"), 9);
    EXPECT_EQ(format_reward(raw), validate_format(raw) ? 1.0 : 0.0);
  }
}

TEST(TotalReward, WeightedSum) {
  EXPECT_EQ(total_reward(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(total_reward(0.0, 1.0), 0.1);
  EXPECT_EQ(total_reward(1.0, 0.0), 0.9);
  EXPECT_EQ(total_reward(0.0, 0.0), 0.0);
  RewardConfig cfg;
  cfg.lambda = 0.25;
  EXPECT_EQ(total_reward(0.5, 1.0, cfg), 0.25 * 0.5 + 0.75);
}

TEST(TotalReward, MonotoneInBothTerms) {
  auto rng = derive_stream(43, "total-monotone");
  for (int it = 0; it < 500; ++it) {
    const double f1 = rng.uniform(0.0, 1.0), fmt = rng.uniform(0.0, 1.0);
    const double df = rng.uniform(0.0, 1.0 - f1);
    EXPECT_GE(total_reward(f1 + df, fmt), total_reward(f1, fmt));
    EXPECT_GE(total_reward(f1, std::min(1.0, fmt + 0.3)), total_reward(f1, fmt));
  }
}

TEST(RewardConfig, Validation) {
  RewardConfig bad;
  bad.lambda = 1.5;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  bad.lambda = 0.9;
  bad.match_tol = -1.0;
  EXPECT_THROW(validate(bad), std::invalid_argument);
}

TEST(RewardResponse, PerfectAnswer) {
  const ReferringTask t = grounded_task();
  const RewardBreakdown r =
      reward_response(t, response_with({{"person 1", kA}, {"person 3", kC}}));
  EXPECT_EQ(r, (RewardBreakdown{1.0, 1.0, 1.0, 1.0, 1.0}));
}

TEST(RewardResponse, CorrectRejection) {
  const RewardBreakdown r = reward_response(rejection_task(), response_with({}));
  EXPECT_EQ(r, (RewardBreakdown{1.0, 1.0, 1.0, 1.0, 1.0}));
}

TEST(RewardResponse, WrongfulRejectionKeepsFormatCredit) {
  const RewardBreakdown r = reward_response(grounded_task(), response_with({}));
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_EQ(r.fmt, 1.0);
  EXPECT_DOUBLE_EQ(r.total, 0.1);
}

TEST(RewardResponse, BoxesOnRejectionTask) {
  const RewardBreakdown r =
      reward_response(rejection_task(), response_with({{"person 1", kA}}));
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_DOUBLE_EQ(r.total, 0.1);
}

TEST(RewardResponse, GarbageScoresZero) {
  const RewardBreakdown r = reward_response(grounded_task(), "the answer is person 1");
  EXPECT_EQ(r, (RewardBreakdown{0.0, 0.0, 0.0, 0.0, 0.0}));
}

TEST(RewardResponse, UnparseableAnswerActsAsEmptySet) {
  const std::string raw = "<think>x</think><answer>not json</answer>";
  const RewardBreakdown grounded = reward_response(grounded_task(), raw);
  EXPECT_EQ(grounded.f1, 0.0);
  EXPECT_DOUBLE_EQ(grounded.total, 0.1);
  // On a rejection task the empty prediction set happens to be right; only
  // the format term separates it from an explicit rejection.
  const RewardBreakdown rejected = reward_response(rejection_task(), raw);
  EXPECT_EQ(rejected.f1, 1.0);
  EXPECT_DOUBLE_EQ(rejected.total, 1.0);
}

TEST(RewardResponse, PartialAnswerScores) {
  const ReferringTask t = grounded_task();  // targets kA and kC
  const RewardBreakdown r = reward_response(t, response_with({{"person 1", kA}}));
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 0.5);
  EXPECT_EQ(r.f1, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.total, 0.9 * (2.0 / 3.0) + 0.1);
}

TEST(RewardResponse, InvariantUnderPredictionOrder) {
  const ReferringTask t = grounded_task();
  const RewardBreakdown fwd =
      reward_response(t, response_with({{"person 1", kA}, {"person 3", kC}}));
  const RewardBreakdown rev =
      reward_response(t, response_with({{"person 3", kC}, {"person 1", kA}}));
  EXPECT_EQ(fwd, rev);
}

TEST(RewardResponse, TotalIsAlwaysTheWeightedSum) {
  const std::vector<std::string> raws{
      response_with({{"person 1", kA}}),
      response_with({{"person 2", kB}, {"person 3", kC}}),
      response_with({}),
      "garbage",
      "<think>x</think><answer>not json</answer>",
  };
  for (const auto& t : {grounded_task(), rejection_task()}) {
    for (const auto& raw : raws) {
      const RewardBreakdown r = reward_response(t, raw);
      EXPECT_DOUBLE_EQ(r.total, 0.9 * r.f1 + 0.1 * r.fmt);
      EXPECT_GE(r.total, 0.0);
      EXPECT_LE(r.total, 1.0);
    }
  }
}

}  // namespace
}  // namespace refrl
