#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "refrl/cot.hpp"
#include "refrl/geometry.hpp"
#include "refrl/grpo.hpp"
#include "refrl/policy.hpp"
#include "refrl/reward.hpp"
#include "refrl/rng.hpp"

namespace refrl {

// Synthetic referring tasks small enough to train against in seconds. Each
// task is a row of non-overlapping candidate boxes on a 1000x1000 canvas
// with color and size attributes; the expression conjoins one or two
// attribute / position predicates, and a configured fraction of tasks ask
// for something absent so the right answer is rejection.
//
// The image content lives in image_ref as a scene descriptor
// ("toy://<color>-<size>,..."), one entry per hint in hint order. That is
// what the policy "sees"; featurize() reads attributes back from it.

inline constexpr double kCanvasSize = 1000.0;
inline constexpr int kMaxCandidatesNorm = 6;  // feature normalizer, not a hard cap
inline constexpr std::size_t kFeatureDim = 10;

inline const std::vector<std::string>& builtin_colors() {
  static const std::vector<std::string> v{"red", "blue", "green", "yellow"};
  return v;
}

inline const std::vector<std::string>& builtin_sizes() {
  static const std::vector<std::string> v{"small", "medium", "large"};
  return v;
}

struct SyntheticSpec {
  int n_tasks = 200;
  int candidates_min = 2;
  int candidates_max = 6;
  std::vector<std::string> colors = builtin_colors();  // subset of builtin_colors()
  int size_levels = 3;                                 // 1..3, prefix of builtin_sizes()
  bool position_predicates = true;                     // allow leftmost / rightmost
  int expression_arity_max = 2;                        // 1..2 conjoined predicates
  double rejection_fraction = 0.1;
  std::uint64_t seed = 0;
  std::string category = "person";
};

inline void validate(const SyntheticSpec& spec) {
  if (spec.n_tasks < 1) throw std::invalid_argument("SyntheticSpec: n_tasks must be >= 1");
  if (spec.candidates_min < 1 || spec.candidates_max < spec.candidates_min)
    throw std::invalid_argument("SyntheticSpec: candidate range is invalid");
  if (spec.candidates_max > 12)
    throw std::invalid_argument("SyntheticSpec: candidates_max must be <= 12");
  if (spec.colors.empty())
    throw std::invalid_argument("SyntheticSpec: colors must be nonempty");
  for (const auto& c : spec.colors) {
    const auto& known = builtin_colors();
    if (std::find(known.begin(), known.end(), c) == known.end())
      throw std::invalid_argument("SyntheticSpec: unknown color \"" + c + "\"");
  }
  if (spec.size_levels < 1 ||
      spec.size_levels > static_cast<int>(builtin_sizes().size()))
    throw std::invalid_argument("SyntheticSpec: size_levels must be in [1, 3]");
  if (spec.expression_arity_max < 1 || spec.expression_arity_max > 2)
    throw std::invalid_argument("SyntheticSpec: expression_arity_max must be 1 or 2");
  if (!(spec.rejection_fraction >= 0.0 && spec.rejection_fraction < 1.0))
    throw std::invalid_argument("SyntheticSpec: rejection_fraction must be in [0, 1)");
  if (spec.category.empty() || spec.category.find(' ') != std::string::npos)
    throw std::invalid_argument("SyntheticSpec: category must be one nonempty word");
}

// Attributes of one candidate as encoded in the scene descriptor.
struct CandidateAttrs {
  std::string color;
  int size_level = 0;

  friend bool operator==(const CandidateAttrs&, const CandidateAttrs&) = default;
};

inline std::string encode_scene(const std::vector<CandidateAttrs>& attrs) {
  std::string out = "toy://";
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (i) out += ",";
    out += attrs[i].color + "-" + std::to_string(attrs[i].size_level);
  }
  return out;
}

inline std::vector<CandidateAttrs> parse_scene(const std::string& image_ref) {
  constexpr std::string_view prefix = "toy://";
  if (image_ref.substr(0, prefix.size()) != prefix)
    throw std::invalid_argument("parse_scene: not a toy scene descriptor: " + image_ref);
  std::vector<CandidateAttrs> attrs;
  std::size_t pos = prefix.size();
  while (pos < image_ref.size()) {
    auto comma = image_ref.find(',', pos);
    if (comma == std::string::npos) comma = image_ref.size();
    const std::string entry = image_ref.substr(pos, comma - pos);
    const auto dash = entry.rfind('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= entry.size())
      throw std::invalid_argument("parse_scene: bad scene entry \"" + entry + "\"");
    CandidateAttrs a;
    a.color = entry.substr(0, dash);
    a.size_level = std::stoi(entry.substr(dash + 1));
    attrs.push_back(std::move(a));
    pos = comma + 1;
  }
  return attrs;
}

// Conjunction of up to one predicate per kind, parsed back from an
// expression like "the leftmost large red person".
struct Predicates {
  std::optional<std::string> color;
  std::optional<int> size_level;
  std::optional<bool> want_rightmost;  // false = leftmost

  int count() const {
    return (color ? 1 : 0) + (size_level ? 1 : 0) + (want_rightmost ? 1 : 0);
  }

  friend bool operator==(const Predicates&, const Predicates&) = default;
};

inline Predicates parse_predicates(const std::string& expression) {
  Predicates p;
  std::size_t pos = 0;
  while (pos < expression.size()) {
    auto space = expression.find(' ', pos);
    if (space == std::string::npos) space = expression.size();
    const std::string_view word(expression.data() + pos, space - pos);
    for (std::size_t i = 0; i < builtin_colors().size(); ++i) {
      if (word == builtin_colors()[i]) p.color = builtin_colors()[i];
    }
    for (std::size_t i = 0; i < builtin_sizes().size(); ++i) {
      if (word == builtin_sizes()[i]) p.size_level = static_cast<int>(i);
    }
    if (word == "leftmost") p.want_rightmost = false;
    if (word == "rightmost") p.want_rightmost = true;
    pos = space + 1;
  }
  return p;
}

inline std::string render_expression(const Predicates& p, const std::string& category) {
  std::string out = "the";
  if (p.want_rightmost) out += *p.want_rightmost ? " rightmost" : " leftmost";
  if (p.size_level) out += " " + builtin_sizes()[static_cast<std::size_t>(*p.size_level)];
  if (p.color) out += " " + *p.color;
  out += " " + category;
  return out;
}

namespace detail {

inline double center_x(const Box& b) { return 0.5 * (b.x0 + b.x1); }

// Competition ranking by box center: 1 + count of strictly-smaller centers,
// so identical boxes share a rank.
inline int position_rank(const ReferringTask& task, std::size_t index) {
  const double cx = center_x(task.hints[index].box);
  int rank = 1;
  for (const auto& h : task.hints) {
    if (center_x(h.box) < cx) ++rank;
  }
  return rank;
}

inline bool satisfies_position(const ReferringTask& task, std::size_t index,
                               bool want_rightmost) {
  const double cx = center_x(task.hints[index].box);
  for (const auto& h : task.hints) {
    const double other = center_x(h.box);
    if (want_rightmost ? other > cx : other < cx) return false;
  }
  return true;
}

}  // namespace detail

// True iff candidate `ordinal` (1-based) satisfies every predicate of the
// task's expression.
inline bool candidate_matches(const ReferringTask& task, int ordinal) {
  if (ordinal < 1 || static_cast<std::size_t>(ordinal) > task.hints.size())
    throw std::invalid_argument("candidate_matches: ordinal out of range");
  const auto idx = static_cast<std::size_t>(ordinal) - 1;
  const Predicates p = parse_predicates(task.expression);
  const std::vector<CandidateAttrs> attrs = parse_scene(task.image_ref);
  if (attrs.size() != task.hints.size())
    throw std::invalid_argument("candidate_matches: scene does not cover hints");

  if (p.color && attrs[idx].color != *p.color) return false;
  if (p.size_level && attrs[idx].size_level != *p.size_level) return false;
  if (p.want_rightmost && !detail::satisfies_position(task, idx, *p.want_rightmost))
    return false;
  return true;
}

// Deterministic task generation. Identical specs (seed included) produce
// identical task lists; every non-rejection ground truth is exactly the set
// of candidates satisfying the expression.
inline std::vector<ReferringTask> generate_tasks(const SyntheticSpec& spec) {
  validate(spec);

  // Spread the rejection tasks across the list deterministically.
  const int n_rejection =
      static_cast<int>(std::llround(spec.rejection_fraction * spec.n_tasks));
  std::vector<std::uint8_t> is_rejection(static_cast<std::size_t>(spec.n_tasks), 0);
  for (int i = 0; i < n_rejection; ++i) is_rejection[static_cast<std::size_t>(i)] = 1;
  {
    auto rng = derive_stream(spec.seed, "rejection-slots");
    rng.shuffle(is_rejection);
  }

  std::vector<ReferringTask> tasks;
  tasks.reserve(static_cast<std::size_t>(spec.n_tasks));

  for (int ti = 0; ti < spec.n_tasks; ++ti) {
    auto rng = derive_stream(spec.seed, "task", {static_cast<std::uint64_t>(ti)});
    ReferringTask task;
    {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "t%06d", ti);
      task.task_id = buf;
    }
    task.category = spec.category;

    const auto n = static_cast<int>(rng.uniform_int(spec.candidates_min, spec.candidates_max));

    // One candidate per vertical strip; strips are assigned to ordinals by a
    // shuffled permutation so hint order and left-to-right order differ.
    const int strip_w = static_cast<int>(kCanvasSize) / n;
    std::vector<int> strip_of(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) strip_of[static_cast<std::size_t>(c)] = c;
    rng.shuffle(strip_of);

    std::vector<CandidateAttrs> attrs;
    static const std::array<int, 3> base_dim{60, 110, 150};
    for (int c = 0; c < n; ++c) {
      CandidateAttrs a;
      a.color = rng.pick(spec.colors);
      a.size_level = static_cast<int>(rng.uniform_int(0, spec.size_levels - 1));
      attrs.push_back(a);

      const int strip = strip_of[static_cast<std::size_t>(c)];
      const int max_w = strip_w - 8;
      const int w = std::min(base_dim[static_cast<std::size_t>(a.size_level)] +
                                 static_cast<int>(rng.uniform_int(0, 20)),
                             max_w);
      const int h = base_dim[static_cast<std::size_t>(a.size_level)] +
                    static_cast<int>(rng.uniform_int(0, 40));
      const int x0 = strip * strip_w + 2 +
                     static_cast<int>(rng.uniform_int(0, std::max(0, max_w - w)));
      const int y0 = static_cast<int>(
          rng.uniform_int(0, static_cast<std::int64_t>(kCanvasSize) - h - 1));

      BoxHint hint;
      hint.label = spec.category + " " + std::to_string(c + 1);
      hint.box = Box{static_cast<double>(x0), static_cast<double>(y0),
                     static_cast<double>(x0 + w), static_cast<double>(y0 + h)};
      task.hints.push_back(std::move(hint));
    }
    task.image_ref = encode_scene(attrs);

    Predicates preds;
    if (is_rejection[static_cast<std::size_t>(ti)]) {
      // Scan for an absent color, then an absent (size, color) pair. With at
      // most 12 candidates one of the size * color combinations is free.
      bool found = false;
      for (const auto& color : spec.colors) {
        if (std::none_of(attrs.begin(), attrs.end(),
                         [&](const CandidateAttrs& a) { return a.color == color; })) {
          preds.color = color;
          found = true;
          break;
        }
      }
      if (!found) {
        for (int lvl = 0; lvl < spec.size_levels && !found; ++lvl) {
          for (const auto& color : spec.colors) {
            const bool taken = std::any_of(
                attrs.begin(), attrs.end(), [&](const CandidateAttrs& a) {
                  return a.color == color && a.size_level == lvl;
                });
            if (!taken) {
              preds.color = color;
              preds.size_level = lvl;
              found = true;
              break;
            }
          }
        }
      }
      if (!found)
        throw std::runtime_error("generate_tasks: cannot build a rejection task for " +
                                 task.task_id + "; enlarge the attribute vocabulary");
      task.subset = SubsetTag::rejection;
    } else {
      const auto target =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));

      std::vector<int> kinds{0, 1};  // 0 = color, 1 = size
      const bool target_edge =
          detail::satisfies_position(task, target, false) ||
          detail::satisfies_position(task, target, true);
      if (spec.position_predicates && target_edge) kinds.push_back(2);
      rng.shuffle(kinds);
      const int arity = static_cast<int>(rng.uniform_int(
          1, std::min<std::int64_t>(spec.expression_arity_max,
                                    static_cast<std::int64_t>(kinds.size()))));
      kinds.resize(static_cast<std::size_t>(arity));

      for (int kind : kinds) {
        if (kind == 0) preds.color = attrs[target].color;
        if (kind == 1) preds.size_level = attrs[target].size_level;
        if (kind == 2)
          preds.want_rightmost = detail::satisfies_position(task, target, true);
      }
      task.subset = preds.want_rightmost ? SubsetTag::position : SubsetTag::attribute;
    }

    task.expression = render_expression(preds, spec.category);
    for (int ordinal = 1; ordinal <= n; ++ordinal) {
      if (candidate_matches(task, ordinal)) task.ground_truth.push_back(ordinal);
    }
    if (is_rejection[static_cast<std::size_t>(ti)] && !task.ground_truth.empty())
      throw std::runtime_error("generate_tasks: rejection predicate unexpectedly satisfiable");
    if (!is_rejection[static_cast<std::size_t>(ti)] && task.ground_truth.empty())
      throw std::runtime_error("generate_tasks: target candidate lost its own predicates");

    tasks.push_back(std::move(task));
  }
  return tasks;
}

// Feature row for one candidate: expression-predicate match indicators,
// position-rank deltas, and normalizers. Dimension is kFeatureDim.
inline std::vector<double> featurize(const ReferringTask& task, int ordinal) {
  if (ordinal < 1 || static_cast<std::size_t>(ordinal) > task.hints.size())
    throw std::invalid_argument("featurize: ordinal out of range");
  const auto idx = static_cast<std::size_t>(ordinal) - 1;
  const Predicates p = parse_predicates(task.expression);
  const std::vector<CandidateAttrs> attrs = parse_scene(task.image_ref);
  if (attrs.size() != task.hints.size())
    throw std::invalid_argument("featurize: scene does not cover hints");

  const auto n = static_cast<double>(task.hints.size());
  const int rank = detail::position_rank(task, idx);

  const bool color_ok = !p.color || attrs[idx].color == *p.color;
  const bool size_ok = !p.size_level || attrs[idx].size_level == *p.size_level;
  const bool pos_ok =
      !p.want_rightmost || detail::satisfies_position(task, idx, *p.want_rightmost);
  const bool all_ok = color_ok && size_ok && pos_ok;

  std::vector<double> f(kFeatureDim, 0.0);
  f[0] = 1.0;  // bias
  f[1] = all_ok ? 1.0 : 0.0;
  f[2] = all_ok ? 0.0 : 1.0;
  f[3] = p.color ? (attrs[idx].color == *p.color ? 1.0 : -1.0) : 0.0;
  f[4] = p.size_level ? (attrs[idx].size_level == *p.size_level ? 1.0 : -1.0) : 0.0;
  f[5] = p.want_rightmost
             ? (detail::satisfies_position(task, idx, *p.want_rightmost) ? 1.0 : -1.0)
             : 0.0;
  if (p.want_rightmost) {
    const double target = *p.want_rightmost ? n : 1.0;
    f[6] = (static_cast<double>(rank) - target) / n;
  }
  f[7] = task.hints.size() > 1 ? (static_cast<double>(rank) - 1.0) / (n - 1.0) : 0.5;
  f[8] = static_cast<double>(p.count()) / 2.0;
  f[9] = n / static_cast<double>(kMaxCandidatesNorm);
  return f;
}

// Per-token log-probabilities of a full selection under the policy; one
// token per candidate, in hint order.
inline std::vector<double> policy_logprob(const ToyPolicyParams& params,
                                          const ReferringTask& task,
                                          const std::vector<std::uint8_t>& selection,
                                          double temperature) {
  if (selection.size() != task.hints.size())
    throw std::invalid_argument("policy_logprob: selection size must match hint count");
  std::vector<double> out;
  out.reserve(selection.size());
  for (std::size_t i = 0; i < selection.size(); ++i) {
    const auto phi = featurize(task, static_cast<int>(i) + 1);
    const double s = include_score(params.weights, phi, temperature);
    out.push_back(token_logprob(s, selection[i] != 0));
  }
  return out;
}

// Builds the canonical response text for a selection: plan line from the
// expression predicates, one verdict per candidate, summary, and the answer
// with the selected hint boxes copied verbatim (empty selection asserts
// rejection).
inline std::string build_response_text(const ReferringTask& task,
                                       const std::vector<std::uint8_t>& selection) {
  if (selection.size() != task.hints.size())
    throw std::invalid_argument("build_response_text: selection size must match hint count");
  const Predicates p = parse_predicates(task.expression);

  std::string wanted;
  if (p.want_rightmost) wanted += *p.want_rightmost ? "rightmost" : "leftmost";
  if (p.size_level) {
    if (!wanted.empty()) wanted += ", ";
    wanted += builtin_sizes()[static_cast<std::size_t>(*p.size_level)];
  }
  if (p.color) {
    if (!wanted.empty()) wanted += ", ";
    wanted += *p.color;
  }
  if (wanted.empty()) wanted = "any " + task.category;

  ThinkTrace trace;
  trace.plan.push_back("Check each " + task.category + " against: " + wanted + ".");

  std::vector<LabeledBox> chosen;
  std::string chosen_labels;
  for (std::size_t i = 0; i < selection.size(); ++i) {
    ThinkAction a;
    a.ordinal = static_cast<int>(i) + 1;
    a.verdict = selection[i] ? Verdict::match : Verdict::no_match;
    a.rationale = selection[i] ? "fits the description" : "does not fit the description";
    trace.actions.push_back(std::move(a));
    if (selection[i]) {
      if (!chosen.empty()) chosen_labels += ", ";
      chosen_labels += task.hints[i].label;
      chosen.push_back({task.hints[i].label, task.hints[i].box});
    }
  }
  trace.summary = chosen.empty() ? "No matching " + task.category + " found."
                                 : "Selected: " + chosen_labels + ".";

  const Answer answer =
      chosen.empty() ? Answer::rejection() : Answer::of_boxes(std::move(chosen));
  return serialize_response(trace, answer, &task);
}

// Recomputation context (features + decisions) for one response.
inline ResponseContext response_context(const ReferringTask& task,
                                        const std::vector<std::uint8_t>& selection) {
  ResponseContext ctx;
  ctx.included = selection;
  ctx.token_features.reserve(selection.size());
  for (std::size_t i = 0; i < selection.size(); ++i) {
    ctx.token_features.push_back(featurize(task, static_cast<int>(i) + 1));
  }
  return ctx;
}

struct RolloutResult {
  std::string raw;
  std::vector<std::uint8_t> selection;
  TokenLogProbs logprobs;  // current == old == sampling policy; ref starts the same
  RewardBreakdown reward;
};

// Samples one response from the policy, serializes it, and scores the
// serialized text (the reward path never sees the selection directly).
inline RolloutResult rollout(const ToyPolicyParams& params, const ReferringTask& task,
                             const GrpoConfig& cfg, RngStream& rng,
                             const RewardConfig& reward_cfg = {}) {
  validate(cfg);
  RolloutResult r;
  r.selection.resize(task.hints.size());
  for (std::size_t i = 0; i < task.hints.size(); ++i) {
    const auto phi = featurize(task, static_cast<int>(i) + 1);
    const double s = include_score(params.weights, phi, cfg.temperature);
    r.selection[i] = rng.uniform() < sigmoid(s) ? 1 : 0;
  }
  const auto lp = policy_logprob(params, task, r.selection, cfg.temperature);
  r.logprobs.current = lp;
  r.logprobs.old = lp;
  r.logprobs.ref = lp;
  r.raw = build_response_text(task, r.selection);
  r.reward = reward_response(task, r.raw, reward_cfg);
  return r;
}

// Deterministic decode: include a candidate iff its inclusion probability
// exceeds one half.
inline std::vector<std::uint8_t> decode_greedy(const ToyPolicyParams& params,
                                               const ReferringTask& task,
                                               double temperature) {
  std::vector<std::uint8_t> selection(task.hints.size(), 0);
  for (std::size_t i = 0; i < task.hints.size(); ++i) {
    const auto phi = featurize(task, static_cast<int>(i) + 1);
    selection[i] = include_score(params.weights, phi, temperature) > 0.0 ? 1 : 0;
  }
  return selection;
}

}  // namespace refrl
