#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

namespace refrl {

// Axis-aligned box in pixel coordinates, origin at the top-left.
// Invariant: x1 > x0, y1 > y0, all coordinates finite. Degenerate boxes are
// rejected wherever boxes enter the system (Box::make, the response parser,
// the record readers), so code taking a Box may assume validity.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }

  bool valid() const {
    return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
           std::isfinite(y1) && x1 > x0 && y1 > y0;
  }

  static std::optional<Box> make(double x0, double y0, double x1, double y1) {
    Box b{x0, y0, x1, y1};
    if (!b.valid()) return std::nullopt;
    return b;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

// One-to-one pairing between a prediction list and a ground-truth list.
// Pairs hold (prediction index, ground-truth index); every index appears in
// exactly one of pairs / unmatched_preds / unmatched_gts.
struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_preds;
  std::vector<std::size_t> unmatched_gts;
};

// Intersection over union; 0 when the boxes are disjoint or merely touch.
inline double iou(const Box& a, const Box& b) {
  const double ix = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double iy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

// Coordinate-wise equality within tol. The reward model treats this as
// "IoU = 1": outputs copied verbatim from the hint list pass, anything
// visibly displaced does not.
inline bool exact_match(const Box& a, const Box& b, double tol = 1e-6) {
  return std::abs(a.x0 - b.x0) <= tol && std::abs(a.y0 - b.y0) <= tol &&
         std::abs(a.x1 - b.x1) <= tol && std::abs(a.y1 - b.y1) <= tol;
}

namespace detail {

inline Matching finish_matching(std::vector<std::pair<std::size_t, std::size_t>> pairs,
                                std::size_t n_preds, std::size_t n_gts) {
  Matching m;
  std::vector<char> pred_used(n_preds, 0), gt_used(n_gts, 0);
  for (const auto& [p, g] : pairs) {
    pred_used[p] = 1;
    gt_used[g] = 1;
  }
  m.pairs = std::move(pairs);
  for (std::size_t i = 0; i < n_preds; ++i)
    if (!pred_used[i]) m.unmatched_preds.push_back(i);
  for (std::size_t j = 0; j < n_gts; ++j)
    if (!gt_used[j]) m.unmatched_gts.push_back(j);
  return m;
}

}  // namespace detail

// Greedy one-to-one matching by descending IoU among pairs at or above the
// threshold. Ties break on lower prediction index, then lower ground-truth
// index, so the result is deterministic.
inline Matching greedy_match(const std::vector<Box>& preds,
                             const std::vector<Box>& gts, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("greedy_match: threshold must be in (0, 1]");

  struct Cand {
    double iou;
    std::size_t pred, gt;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      const double v = iou(preds[i], gts[j]);
      if (v >= threshold) cands.push_back({v, i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return std::tie(b.iou, a.pred, a.gt) < std::tie(a.iou, b.pred, b.gt);
  });

  std::vector<char> pred_used(preds.size(), 0), gt_used(gts.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& c : cands) {
    if (pred_used[c.pred] || gt_used[c.gt]) continue;
    pred_used[c.pred] = 1;
    gt_used[c.gt] = 1;
    pairs.emplace_back(c.pred, c.gt);
  }
  return detail::finish_matching(std::move(pairs), preds.size(), gts.size());
}

// One-to-one exact matching, greedy in index order: each prediction takes
// the first still-unmatched ground truth it equals within tol. Duplicate
// identical predictions therefore consume at most one ground truth each.
inline Matching exact_match_set(const std::vector<Box>& preds,
                                const std::vector<Box>& gts, double tol = 1e-6) {
  std::vector<char> gt_used(gts.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (gt_used[j] || !exact_match(preds[i], gts[j], tol)) continue;
      gt_used[j] = 1;
      pairs.emplace_back(i, j);
      break;
    }
  }
  return detail::finish_matching(std::move(pairs), preds.size(), gts.size());
}

}  // namespace refrl
