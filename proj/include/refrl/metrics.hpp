#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "refrl/cot.hpp"
#include "refrl/geometry.hpp"

namespace refrl {

// Benchmark-style evaluation: per-task precision / recall / F1 averaged over
// an IoU threshold grid, macro-averaged per subset, with a separate score
// for how often rejection tasks are answered with an empty set.

// The ten-point grid 0.50, 0.55, ..., 0.95.
inline std::vector<double> default_threshold_grid() {
  return {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
}

struct ThresholdCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

inline ThresholdCounts counts_at_threshold(const std::vector<Box>& preds,
                                           const std::vector<Box>& gts,
                                           double threshold) {
  const Matching m = greedy_match(preds, gts, threshold);
  return {m.pairs.size(), m.unmatched_preds.size(), m.unmatched_gts.size()};
}

// Per-threshold score hook: maps set sizes and true positives to an
// F1-style score. The default is plain F1 with the empty-set conventions
// (both sides empty -> 1, one side empty -> 0); density-weighted variants
// plug in here without touching the evaluator.
using ScoreHook = std::function<double(std::size_t n_preds, std::size_t n_gts, std::size_t tp)>;

inline double plain_f1_score(std::size_t n_preds, std::size_t n_gts, std::size_t tp) {
  if (n_preds == 0 && n_gts == 0) return 1.0;
  if (n_preds == 0 || n_gts == 0) return 0.0;
  const double p = static_cast<double>(tp) / static_cast<double>(n_preds);
  const double r = static_cast<double>(tp) / static_cast<double>(n_gts);
  return (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
}

struct TaskMetrics {
  double recall = 0.0;
  double precision = 0.0;
  double df1 = 0.0;  // grid-averaged F1 (density hook applied per threshold)

  friend bool operator==(const TaskMetrics&, const TaskMetrics&) = default;
};

namespace detail {

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("threshold grid must be nonempty");
  double prev = 0.0;
  for (double t : grid) {
    if (!(t > 0.0 && t <= 1.0))
      throw std::invalid_argument("threshold grid values must be in (0, 1]");
    if (!(t > prev)) throw std::invalid_argument("threshold grid must be strictly ascending");
    prev = t;
  }
}

}  // namespace detail

// Precision / recall / DF1 for one task, each averaged over the grid.
// Empty-set conventions apply per threshold: both sides empty -> (1, 1, 1),
// one side empty -> (0, 0, 0).
inline TaskMetrics task_metrics(const std::vector<Box>& preds, const std::vector<Box>& gts,
                                const std::vector<double>& grid = default_threshold_grid(),
                                const ScoreHook& score = plain_f1_score) {
  detail::check_grid(grid);
  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
  for (double t : grid) {
    if (preds.empty() && gts.empty()) {
      sum_p += 1.0;
      sum_r += 1.0;
      sum_f += score(0, 0, 0);
      continue;
    }
    if (preds.empty() || gts.empty()) {
      sum_f += score(preds.size(), gts.size(), 0);
      continue;
    }
    const ThresholdCounts c = counts_at_threshold(preds, gts, t);
    sum_p += static_cast<double>(c.tp) / static_cast<double>(preds.size());
    sum_r += static_cast<double>(c.tp) / static_cast<double>(gts.size());
    sum_f += score(preds.size(), gts.size(), c.tp);
  }
  const auto n = static_cast<double>(grid.size());
  return {sum_r / n, sum_p / n, sum_f / n};
}

// One prediction record per task. Either the raw response text (boxes are
// its parsed answer) or an explicit box list; an empty box list asserts
// rejection.
struct PredictionRecord {
  std::string task_id;
  std::optional<std::string> raw_response;
  std::vector<LabeledBox> boxes;

  static PredictionRecord from_raw(std::string task_id, std::string raw) {
    PredictionRecord r;
    r.task_id = std::move(task_id);
    r.raw_response = std::move(raw);
    const CoTResponse parsed = parse_response(*r.raw_response);
    if (parsed.answer.kind == AnswerKind::boxes) r.boxes = parsed.answer.boxes;
    return r;
  }
};

namespace detail {

inline std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += xs[i];
  }
  return out;
}

// task_id -> record index, after uniqueness and coverage checks.
inline std::map<std::string, std::size_t> index_records(
    const std::vector<ReferringTask>& tasks, const std::vector<PredictionRecord>& records) {
  std::vector<std::string> offenders;

  std::set<std::string> task_ids;
  for (const auto& t : tasks) {
    if (!task_ids.insert(t.task_id).second) offenders.push_back(t.task_id);
  }
  if (!offenders.empty())
    throw std::runtime_error("duplicate task ids: " + join(offenders));

  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!by_id.emplace(records[i].task_id, i).second) offenders.push_back(records[i].task_id);
  }
  if (!offenders.empty())
    throw std::runtime_error("duplicate prediction records: " + join(offenders));

  for (const auto& [id, idx] : by_id) {
    if (!task_ids.count(id)) offenders.push_back(id);
  }
  if (!offenders.empty())
    throw std::runtime_error("prediction records for unknown task ids: " + join(offenders));

  for (const auto& t : tasks) {
    if (!by_id.count(t.task_id)) offenders.push_back(t.task_id);
  }
  if (!offenders.empty())
    throw std::runtime_error("tasks without prediction records: " + join(offenders));

  return by_id;
}

}  // namespace detail

// Fraction of rejection-subset tasks answered with an empty box set.
// Requires a record for every rejection task.
inline double rejection_score(const std::vector<ReferringTask>& tasks,
                              const std::vector<PredictionRecord>& records) {
  std::map<std::string, const PredictionRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.task_id, &r);

  std::size_t n = 0, correct = 0;
  for (const auto& t : tasks) {
    if (t.subset != SubsetTag::rejection) continue;
    const auto it = by_id.find(t.task_id);
    if (it == by_id.end())
      throw std::runtime_error("no prediction record for rejection task " + t.task_id);
    ++n;
    if (it->second->boxes.empty()) ++correct;
  }
  if (n == 0) throw std::runtime_error("rejection_score: no rejection tasks present");
  return static_cast<double>(correct) / static_cast<double>(n);
}

struct SubsetMetrics {
  double recall = 0.0;
  double precision = 0.0;
  double df1 = 0.0;
  std::size_t n_tasks = 0;

  friend bool operator==(const SubsetMetrics&, const SubsetMetrics&) = default;
};

struct EvalReport {
  std::vector<double> threshold_grid;
  std::map<SubsetTag, SubsetMetrics> per_subset;
  TaskMetrics overall;                    // unweighted mean over non-rejection subsets
  std::optional<double> rejection_score;  // absent when no rejection tasks

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Full benchmark evaluation. Exactly one record per task is required;
// duplicates, missing records, and records for unknown tasks are reported
// together by id. Aggregation runs in sorted task-id order, so the report
// is invariant to input ordering.
inline EvalReport evaluate(const std::vector<ReferringTask>& tasks,
                           const std::vector<PredictionRecord>& records,
                           const std::vector<double>& grid = default_threshold_grid(),
                           const ScoreHook& score = plain_f1_score) {
  detail::check_grid(grid);
  const auto by_id = detail::index_records(tasks, records);

  std::vector<const ReferringTask*> ordered;
  ordered.reserve(tasks.size());
  for (const auto& t : tasks) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const ReferringTask* a, const ReferringTask* b) { return a->task_id < b->task_id; });

  EvalReport report;
  report.threshold_grid = grid;

  struct Acc {
    double r = 0.0, p = 0.0, f = 0.0;
    std::size_t n = 0;
  };
  std::map<SubsetTag, Acc> acc;
  std::size_t n_rejection = 0, rejection_correct = 0;

  for (const ReferringTask* t : ordered) {
    const PredictionRecord& rec = records[by_id.at(t->task_id)];
    std::vector<Box> preds;
    preds.reserve(rec.boxes.size());
    for (const auto& lb : rec.boxes) preds.push_back(lb.box);
    std::vector<Box> gts;
    gts.reserve(t->ground_truth.size());
    for (int ordinal : t->ground_truth)
      gts.push_back(t->hints[static_cast<std::size_t>(ordinal) - 1].box);

    const TaskMetrics m = task_metrics(preds, gts, grid, score);
    Acc& a = acc[t->subset];
    a.r += m.recall;
    a.p += m.precision;
    a.f += m.df1;
    a.n += 1;

    if (t->subset == SubsetTag::rejection) {
      ++n_rejection;
      if (preds.empty()) ++rejection_correct;
    }
  }

  double sum_r = 0.0, sum_p = 0.0, sum_f = 0.0;
  std::size_t n_subsets = 0;
  for (const auto& [tag, a] : acc) {
    const auto n = static_cast<double>(a.n);
    report.per_subset[tag] = {a.r / n, a.p / n, a.f / n, a.n};
    if (tag == SubsetTag::rejection) continue;
    sum_r += a.r / n;
    sum_p += a.p / n;
    sum_f += a.f / n;
    ++n_subsets;
  }
  if (n_subsets > 0) {
    report.overall = {sum_r / static_cast<double>(n_subsets),
                      sum_p / static_cast<double>(n_subsets),
                      sum_f / static_cast<double>(n_subsets)};
  }
  if (n_rejection > 0) {
    report.rejection_score =
        static_cast<double>(rejection_correct) / static_cast<double>(n_rejection);
  }
  return report;
}

}  // namespace refrl
