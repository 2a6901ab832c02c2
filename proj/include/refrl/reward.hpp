#pragma once

#include <stdexcept>
#include <string_view>
#include <vector>

#include "refrl/cot.hpp"
#include "refrl/geometry.hpp"

namespace refrl {

struct RewardConfig {
  double lambda = 0.9;    // weight of the accuracy term vs the format term
  double match_tol = 1e-6;  // coordinate tolerance for exact matching
};

inline void validate(const RewardConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
    throw std::invalid_argument("RewardConfig: lambda must be in [0, 1]");
  if (!(cfg.match_tol >= 0.0))
    throw std::invalid_argument("RewardConfig: match_tol must be >= 0");
}

struct F1Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Exact-match F1 between predicted and ground-truth boxes. Matching is
// one-to-one at IoU = 1 (coordinate-wise within tol): a box either copies a
// hint verbatim or it scores nothing. Empty-set conventions: both sides
// empty scores (1, 1, 1) -- a correct rejection; one side empty scores
// (0, 0, 0).
inline F1Scores f1_reward(const std::vector<Box>& preds, const std::vector<Box>& gts,
                          double tol = 1e-6) {
  if (preds.empty() && gts.empty()) return {1.0, 1.0, 1.0};
  if (preds.empty() || gts.empty()) return {0.0, 0.0, 0.0};
  const auto m = static_cast<double>(exact_match_set(preds, gts, tol).pairs.size());
  const double p = m / static_cast<double>(preds.size());
  const double r = m / static_cast<double>(gts.size());
  const double f1 = (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
  return {p, r, f1};
}

// Binary: 1 when the response envelope is well formed, else 0.
inline double format_reward(std::string_view raw) {
  return validate_format(raw) ? 1.0 : 0.0;
}

inline double total_reward(double f1, double fmt, const RewardConfig& cfg = {}) {
  return cfg.lambda * f1 + (1.0 - cfg.lambda) * fmt;
}

struct RewardBreakdown {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double fmt = 0.0;
  double total = 0.0;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

// Scores one raw response against a task. The prediction set is the parsed
// answer's boxes; rejection and unparseable answers both contribute an
// empty set, so a correct rejection earns full accuracy while a garbled
// answer scores like an (often wrong) rejection and is docked only through
// the format term. Never throws on response content.
inline RewardBreakdown reward_response(const ReferringTask& task, std::string_view raw,
                                       const RewardConfig& cfg = {}) {
  validate(cfg);
  const CoTResponse parsed = parse_response(raw);

  std::vector<Box> preds;
  if (parsed.answer.kind == AnswerKind::boxes) {
    preds.reserve(parsed.answer.boxes.size());
    for (const auto& lb : parsed.answer.boxes) preds.push_back(lb.box);
  }

  std::vector<Box> gts;
  gts.reserve(task.ground_truth.size());
  for (int ordinal : task.ground_truth) {
    gts.push_back(task.hints[static_cast<std::size_t>(ordinal) - 1].box);
  }

  const F1Scores f1 = f1_reward(preds, gts, cfg.match_tol);
  const double fmt = format_reward(raw);
  RewardBreakdown out;
  out.precision = f1.precision;
  out.recall = f1.recall;
  out.f1 = f1.f1;
  out.fmt = fmt;
  out.total = total_reward(f1.f1, fmt, cfg);
  return out;
}

}  // namespace refrl
