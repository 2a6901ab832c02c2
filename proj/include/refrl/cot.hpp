#pragma once

#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "refrl/geometry.hpp"
#include "refrl/textfmt.hpp"

namespace refrl {

// Grammar for grounded referring responses. A well-formed response is one
// think block followed by one answer block:
//
//   <think> ...plan / per-candidate checks / summary... </think>
//   <answer> JSON array of {label: [x0, y0, x1, y1]} objects, or [] </answer>
//
// The parser is strict about the envelope and the answer payload, and
// lenient about the free-form reasoning inside the think block.

enum class SubsetTag {
  attribute,
  position,
  interaction,
  reasoning,
  celebrity,
  rejection,
  synthetic,
};

inline std::string_view to_string(SubsetTag t) {
  switch (t) {
    case SubsetTag::attribute: return "attribute";
    case SubsetTag::position: return "position";
    case SubsetTag::interaction: return "interaction";
    case SubsetTag::reasoning: return "reasoning";
    case SubsetTag::celebrity: return "celebrity";
    case SubsetTag::rejection: return "rejection";
    case SubsetTag::synthetic: return "synthetic";
  }
  return "?";
}

inline std::optional<SubsetTag> subset_from_string(std::string_view s) {
  for (auto t : {SubsetTag::attribute, SubsetTag::position, SubsetTag::interaction,
                 SubsetTag::reasoning, SubsetTag::celebrity, SubsetTag::rejection,
                 SubsetTag::synthetic}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

// One candidate box shown to the policy. Label is "<category> <ordinal>",
// ordinals consecutive from 1 in hint order.
struct BoxHint {
  std::string label;
  Box box;

  friend bool operator==(const BoxHint&, const BoxHint&) = default;
};

// A referring task: an expression to ground against a hinted image.
// ground_truth holds 1-based hint ordinals, sorted ascending; empty exactly
// for rejection tasks (nothing in the image matches the expression).
struct ReferringTask {
  std::string task_id;
  std::string image_ref;  // opaque reference to the image content
  SubsetTag subset = SubsetTag::synthetic;
  std::string category;
  std::string expression;
  std::vector<BoxHint> hints;
  std::vector<int> ground_truth;

  friend bool operator==(const ReferringTask&, const ReferringTask&) = default;
};

enum class Verdict { match, no_match, partial };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::match: return "match";
    case Verdict::no_match: return "no match";
    case Verdict::partial: return "partial";
  }
  return "?";
}

inline std::optional<Verdict> verdict_from_string(std::string_view s) {
  if (s == "match") return Verdict::match;
  if (s == "no match") return Verdict::no_match;
  if (s == "partial") return Verdict::partial;
  return std::nullopt;
}

// One per-candidate check inside the think block.
struct ThinkAction {
  int ordinal = 0;  // 1-based hint ordinal
  Verdict verdict = Verdict::no_match;
  std::string rationale;

  friend bool operator==(const ThinkAction&, const ThinkAction&) = default;
};

// Structured reading of a think block: plan steps, per-candidate actions,
// one-line summary. A trace with an empty plan is "unstructured": the block
// existed but did not follow the plan/action/summary layout.
struct ThinkTrace {
  std::vector<std::string> plan;
  std::vector<ThinkAction> actions;
  std::string summary;

  bool structured() const { return !plan.empty(); }

  friend bool operator==(const ThinkTrace&, const ThinkTrace&) = default;
};

struct LabeledBox {
  std::string label;
  Box box;

  friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

enum class AnswerKind {
  boxes,        // grounded: one or more labeled boxes
  rejection,    // explicit "nothing matches" ([], "no match", "none")
  unparseable,  // payload did not follow the grammar
};

inline std::string_view to_string(AnswerKind k) {
  switch (k) {
    case AnswerKind::boxes: return "boxes";
    case AnswerKind::rejection: return "rejection";
    case AnswerKind::unparseable: return "unparseable";
  }
  return "?";
}

struct Answer {
  AnswerKind kind = AnswerKind::unparseable;
  std::vector<LabeledBox> boxes;  // nonempty only when kind == boxes

  static Answer of_boxes(std::vector<LabeledBox> b) {
    return Answer{AnswerKind::boxes, std::move(b)};
  }
  static Answer rejection() { return Answer{AnswerKind::rejection, {}}; }
  static Answer unparseable() { return Answer{AnswerKind::unparseable, {}}; }

  friend bool operator==(const Answer&, const Answer&) = default;
};

// Full parse of one raw response string.
struct CoTResponse {
  std::string raw;
  bool format_ok = false;
  std::optional<ThinkTrace> trace;  // absent when there is no think block
  Answer answer;
};

namespace detail {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline bool all_space(std::string_view s) {
  for (char c : s)
    if (!is_space(c)) return false;
  return true;
}

inline std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

// Content of the first needle-delimited block, or nullopt.
inline std::optional<std::string_view> block_content(std::string_view raw,
                                                     std::string_view open,
                                                     std::string_view close) {
  const auto a = raw.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = raw.find(close, a + open.size());
  if (b == std::string_view::npos) return std::nullopt;
  return raw.substr(a + open.size(), b - (a + open.size()));
}

}  // namespace detail

// True iff the response is exactly one properly closed think block followed
// by one properly closed answer block, with nothing but whitespace outside.
inline bool validate_format(std::string_view raw) {
  using namespace detail;
  if (count_occurrences(raw, kThinkOpen) != 1) return false;
  if (count_occurrences(raw, kThinkClose) != 1) return false;
  if (count_occurrences(raw, kAnswerOpen) != 1) return false;
  if (count_occurrences(raw, kAnswerClose) != 1) return false;

  const auto t0 = raw.find(kThinkOpen);
  const auto t1 = raw.find(kThinkClose);
  const auto a0 = raw.find(kAnswerOpen);
  const auto a1 = raw.find(kAnswerClose);
  if (!(t0 < t1 && t1 < a0 && a0 < a1)) return false;

  if (!all_space(raw.substr(0, t0))) return false;
  const auto gap_begin = t1 + kThinkClose.size();
  if (!all_space(raw.substr(gap_begin, a0 - gap_begin))) return false;
  if (!all_space(raw.substr(a1 + kAnswerClose.size()))) return false;
  return true;
}

// Parses the payload of an answer block. Accepts the canonical array of
// single-key {label: [x0, y0, x1, y1]} objects, a bare array of 4-number
// lists (labels synthesized as "object k"), and the rejection forms "[]",
// "no match", "none". A fenced ```json block around the payload is
// stripped. Any element with the wrong arity or a degenerate box makes the
// whole answer unparseable; this never throws.
inline Answer parse_answer(std::string_view payload) {
  using namespace detail;
  std::string_view s = trim(payload);

  // Strip one fenced code block if it wraps the whole payload.
  if (s.substr(0, 3) == "```") {
    const auto nl = s.find('\n');
    const auto end = s.rfind("```");
    if (nl != std::string_view::npos && end != std::string_view::npos && end > nl) {
      s = trim(s.substr(nl + 1, end - nl - 1));
    }
  }

  if (s.empty()) return Answer::unparseable();

  {
    std::string low = to_lower(s);
    if (!low.empty() && low.back() == '.') low.pop_back();
    if (low == "no match" || low == "none") return Answer::rejection();
  }

  const nlohmann::json j = nlohmann::json::parse(s, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_array()) return Answer::unparseable();
  if (j.empty()) return Answer::rejection();

  auto parse_box = [](const nlohmann::json& arr) -> std::optional<Box> {
    if (!arr.is_array() || arr.size() != 4) return std::nullopt;
    double c[4];
    for (std::size_t i = 0; i < 4; ++i) {
      if (!arr[i].is_number()) return std::nullopt;
      c[i] = arr[i].get<double>();
    }
    return Box::make(c[0], c[1], c[2], c[3]);
  };

  std::vector<LabeledBox> boxes;
  const bool object_form = j.front().is_object();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& el = j[i];
    if (object_form) {
      if (!el.is_object() || el.size() != 1) return Answer::unparseable();
      const auto it = el.begin();
      const auto box = parse_box(it.value());
      if (!box) return Answer::unparseable();
      boxes.push_back({it.key(), *box});
    } else {
      const auto box = parse_box(el);
      if (!box) return Answer::unparseable();
      boxes.push_back({"object " + std::to_string(i + 1), *box});
    }
  }
  return Answer::of_boxes(std::move(boxes));
}

namespace detail {

// Lenient reading of a think block. Recognizes the canonical layout
//
//   Plan:
//   1. <step>
//   Action:
//   - <label>: <verdict> | <rationale>
//   Summary: <text>
//
// and skips anything it does not recognize; never fails.
inline ThinkTrace parse_think(std::string_view content) {
  ThinkTrace trace;
  enum class Mode { none, plan, action } mode = Mode::none;
  bool summary_seen = false;

  std::size_t pos = 0;
  while (pos <= content.size()) {
    const auto nl = content.find('\n', pos);
    std::string_view line = content.substr(
        pos, nl == std::string_view::npos ? content.size() - pos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line == "Plan:") {
      mode = Mode::plan;
    } else if (line == "Action:") {
      mode = Mode::action;
    } else if (line.substr(0, 9) == "Summary: " && !summary_seen) {
      trace.summary = std::string(line.substr(9));
      summary_seen = true;
      mode = Mode::none;
    } else if (mode == Mode::plan) {
      std::size_t d = 0;
      while (d < line.size() && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
      if (d > 0 && d + 1 < line.size() && line[d] == '.' && line[d + 1] == ' ') {
        trace.plan.emplace_back(line.substr(d + 2));
      }
    } else if (mode == Mode::action && line.substr(0, 2) == "- ") {
      const std::string_view rest = line.substr(2);
      const auto colon = rest.find(": ");
      if (colon != std::string_view::npos) {
        const std::string_view label = rest.substr(0, colon);
        std::string_view tail = rest.substr(colon + 2);
        std::string_view verdict_text = tail;
        std::string_view rationale;
        const auto bar = tail.find(" | ");
        if (bar != std::string_view::npos) {
          verdict_text = tail.substr(0, bar);
          rationale = tail.substr(bar + 3);
        }
        const auto verdict = verdict_from_string(verdict_text);
        // Ordinal is the trailing integer of the label ("person 3" -> 3).
        const auto space = label.rfind(' ');
        int ordinal = 0;
        bool ok = verdict.has_value() && space != std::string_view::npos;
        if (ok) {
          const std::string_view digits = label.substr(space + 1);
          ok = !digits.empty();
          for (char c : digits) {
            if (!std::isdigit(static_cast<unsigned char>(c))) ok = false;
          }
          if (ok) ordinal = std::stoi(std::string(digits));
        }
        if (ok && ordinal >= 1) {
          trace.actions.push_back({ordinal, *verdict, std::string(rationale)});
        }
      }
    }

    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return trace;
}

inline std::string box_to_json(const Box& b) {
  return "[" + fmt_coord(b.x0) + ", " + fmt_coord(b.y0) + ", " + fmt_coord(b.x1) +
         ", " + fmt_coord(b.y1) + "]";
}

inline std::string answer_to_json(const Answer& answer) {
  if (answer.kind != AnswerKind::boxes) return "[]";
  std::string out = "[";
  for (std::size_t i = 0; i < answer.boxes.size(); ++i) {
    if (i) out += ", ";
    out += "{" + json_quote(answer.boxes[i].label) + ": " +
           box_to_json(answer.boxes[i].box) + "}";
  }
  return out + "]";
}

}  // namespace detail

// Full parse of a raw response. format_ok reflects validate_format; the
// trace and answer are extracted leniently from the first think / answer
// block even when the envelope is malformed, so rewards and reports can
// still see what the response tried to say. Never throws.
inline CoTResponse parse_response(std::string_view raw) {
  using namespace detail;
  CoTResponse r;
  r.raw = std::string(raw);
  r.format_ok = validate_format(raw);

  if (const auto think = block_content(raw, kThinkOpen, kThinkClose)) {
    r.trace = parse_think(*think);
  }
  if (const auto ans = block_content(raw, kAnswerOpen, kAnswerClose)) {
    r.answer = parse_answer(*ans);
  } else {
    r.answer = Answer::unparseable();
  }
  return r;
}

// Canonical serialization. The result always passes validate_format and
// parse_response recovers the trace and answer exactly, provided the trace
// strings are single-line and the rationale does not embed the " | "
// separator. When a task is supplied, action ordinals are checked against
// its hint list and labels are taken from it.
inline std::string serialize_response(const ThinkTrace& trace, const Answer& answer,
                                      const ReferringTask* task = nullptr) {
  using namespace detail;
  if (answer.kind == AnswerKind::unparseable)
    throw std::invalid_argument("serialize_response: cannot serialize an unparseable answer");

  auto label_for = [&](int ordinal) -> std::string {
    if (task) {
      if (ordinal < 1 || static_cast<std::size_t>(ordinal) > task->hints.size())
        throw std::invalid_argument("serialize_response: action ordinal " +
                                    std::to_string(ordinal) + " out of range for task " +
                                    task->task_id);
      return task->hints[static_cast<std::size_t>(ordinal) - 1].label;
    }
    return "object " + std::to_string(ordinal);
  };

  std::string body;
  if (!trace.plan.empty()) {
    body += "Plan:\n";
    for (std::size_t i = 0; i < trace.plan.size(); ++i) {
      body += std::to_string(i + 1) + ". " + trace.plan[i] + "\n";
    }
  }
  if (!trace.actions.empty()) {
    body += "Action:\n";
    for (const auto& a : trace.actions) {
      if (a.ordinal < 1)
        throw std::invalid_argument("serialize_response: action ordinal must be >= 1");
      body += "- " + label_for(a.ordinal) + ": " + std::string(to_string(a.verdict));
      if (!a.rationale.empty()) body += " | " + a.rationale;
      body += "\n";
    }
  }
  if (!trace.summary.empty()) body += "Summary: " + trace.summary + "\n";

  return "<think>\n" + body + "</think>\n<answer>\n```json\n" +
         answer_to_json(answer) + "\n```\n</answer>";
}

// Instruction preamble placed ahead of the hint list and the request.
inline std::string_view default_system_preamble() {
  return "<image>. A conversation between User and Assistant. The user asks a "
         "question, and the Assistant solves it. The assistant first thinks about "
         "the reasoning process in the mind and then provides the user with the "
         "answer. The reasoning process and answer are enclosed within <think> "
         "</think> and <answer> </answer> tags, respectively, i.e., <think> "
         "reasoning process here </think> <answer> answer here </answer>.";
}

// Renders the full prompt for a task: preamble, serialized hint list, and
// the referring request. Byte-deterministic and injective in (hints,
// expression); coordinates print as integers when integral.
inline std::string render_prompt(const ReferringTask& task,
                                 std::string_view preamble = default_system_preamble()) {
  using namespace detail;
  if (trim(task.expression).empty())
    throw std::invalid_argument("render_prompt: empty expression for task " + task.task_id);

  std::string hints;
  for (std::size_t i = 0; i < task.hints.size(); ++i) {
    if (i) hints += ", ";
    hints += "{" + json_quote(task.hints[i].label) + ": " + box_to_json(task.hints[i].box) + "}";
  }

  std::string out(preamble);
  out += " Hint: Object and its coordinates in this image: ";
  out += hints;
  out += ". User: Locate ";
  out += task.expression;
  out += ". Assistant:";
  return out;
}

}  // namespace refrl
