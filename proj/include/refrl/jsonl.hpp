#pragma once

#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "refrl/cot.hpp"
#include "refrl/metrics.hpp"
#include "refrl/textfmt.hpp"
#include "refrl/trainer.hpp"

namespace refrl {

// On-disk record formats. Every JSONL line carries "v": 1 and readers
// reject other versions. Writers emit fields in a fixed order with floats
// through fmt_g9 / fmt_coord, so identical data always serializes to
// identical bytes.

inline constexpr int kSchemaVersion = 1;

struct JsonlError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void fail_line(std::size_t line, const std::string& what) {
  throw JsonlError("line " + std::to_string(line) + ": " + what);
}

inline nlohmann::json parse_line(const std::string& text, std::size_t line) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail_line(line, "invalid JSON");
  if (!j.is_object()) fail_line(line, "record must be a JSON object");
  return j;
}

inline void check_version(const nlohmann::json& j, std::size_t line) {
  if (!j.contains("v") || !j["v"].is_number_integer())
    fail_line(line, "missing schema version \"v\"");
  if (j["v"].get<int>() != kSchemaVersion)
    fail_line(line, "unsupported schema version " + j["v"].dump());
}

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& required,
                       const std::set<std::string>& optional, std::size_t line) {
  for (const auto& key : required) {
    if (!j.contains(key)) fail_line(line, "missing key \"" + key + "\"");
  }
  for (const auto& [key, value] : j.items()) {
    if (!required.count(key) && !optional.count(key))
      fail_line(line, "unknown key \"" + key + "\"");
  }
}

inline std::string get_string(const nlohmann::json& j, const char* key, std::size_t line) {
  if (!j[key].is_string()) fail_line(line, std::string("\"") + key + "\" must be a string");
  return j[key].get<std::string>();
}

inline Box get_box(const nlohmann::json& arr, std::size_t line) {
  if (!arr.is_array() || arr.size() != 4) fail_line(line, "\"box\" must be [x0, y0, x1, y1]");
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!arr[i].is_number()) fail_line(line, "box coordinates must be numbers");
    c[i] = arr[i].get<double>();
  }
  const auto box = Box::make(c[0], c[1], c[2], c[3]);
  if (!box) fail_line(line, "degenerate box");
  return *box;
}

inline std::string box_json(const Box& b) {
  return "[" + fmt_coord(b.x0) + "," + fmt_coord(b.y0) + "," + fmt_coord(b.x1) + "," +
         fmt_coord(b.y1) + "]";
}

}  // namespace detail

// ---- tasks ----------------------------------------------------------------

inline std::string task_to_jsonl(const ReferringTask& task) {
  std::string out = "{\"v\":1,\"task_id\":" + json_quote(task.task_id) +
                    ",\"image_ref\":" + json_quote(task.image_ref) +
                    ",\"subset\":" + json_quote(to_string(task.subset)) +
                    ",\"category\":" + json_quote(task.category) +
                    ",\"expression\":" + json_quote(task.expression) + ",\"hints\":[";
  for (std::size_t i = 0; i < task.hints.size(); ++i) {
    if (i) out += ",";
    out += "{\"label\":" + json_quote(task.hints[i].label) +
           ",\"box\":" + detail::box_json(task.hints[i].box) + "}";
  }
  out += "],\"gt\":[";
  for (std::size_t i = 0; i < task.ground_truth.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(task.ground_truth[i]);
  }
  out += "]}";
  return out;
}

inline void write_tasks_jsonl(std::ostream& os, const std::vector<ReferringTask>& tasks) {
  for (const auto& t : tasks) os << task_to_jsonl(t) << "\n";
}

inline ReferringTask task_from_json(const nlohmann::json& j, std::size_t line) {
  using namespace detail;
  check_version(j, line);
  check_keys(j,
             {"v", "task_id", "image_ref", "subset", "category", "expression", "hints", "gt"},
             {}, line);

  ReferringTask task;
  task.task_id = get_string(j, "task_id", line);
  if (task.task_id.empty()) fail_line(line, "empty task_id");
  task.image_ref = get_string(j, "image_ref", line);
  const auto subset = subset_from_string(get_string(j, "subset", line));
  if (!subset) fail_line(line, "unknown subset \"" + get_string(j, "subset", line) + "\"");
  task.subset = *subset;
  task.category = get_string(j, "category", line);
  if (task.category.empty()) fail_line(line, "empty category");
  task.expression = get_string(j, "expression", line);
  if (task.expression.empty()) fail_line(line, "empty expression");

  if (!j["hints"].is_array()) fail_line(line, "\"hints\" must be an array");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < j["hints"].size(); ++i) {
    const auto& h = j["hints"][i];
    if (!h.is_object()) fail_line(line, "hint must be an object");
    check_keys(h, {"label", "box"}, {}, line);
    BoxHint hint;
    hint.label = get_string(h, "label", line);
    if (hint.label.empty()) fail_line(line, "empty hint label");
    if (!labels.insert(hint.label).second)
      fail_line(line, "duplicate hint label \"" + hint.label + "\"");
    // Hint ordinals run 1..n in hint order; the label's trailing integer
    // must agree with its position.
    const auto space = hint.label.rfind(' ');
    if (space == std::string::npos ||
        hint.label.substr(space + 1) != std::to_string(i + 1))
      fail_line(line, "hint label \"" + hint.label + "\" must end with ordinal " +
                          std::to_string(i + 1));
    hint.box = get_box(h["box"], line);
    task.hints.push_back(std::move(hint));
  }

  if (!j["gt"].is_array()) fail_line(line, "\"gt\" must be an array");
  std::set<int> seen;
  for (const auto& g : j["gt"]) {
    if (!g.is_number_integer()) fail_line(line, "gt ordinals must be integers");
    const int ordinal = g.get<int>();
    if (ordinal < 1 || static_cast<std::size_t>(ordinal) > task.hints.size())
      fail_line(line, "gt ordinal " + std::to_string(ordinal) + " out of range");
    if (!seen.insert(ordinal).second)
      fail_line(line, "duplicate gt ordinal " + std::to_string(ordinal));
  }
  task.ground_truth.assign(seen.begin(), seen.end());

  if (task.subset == SubsetTag::rejection && !task.ground_truth.empty())
    fail_line(line, "rejection task with nonempty gt");
  return task;
}

inline std::vector<ReferringTask> read_tasks_jsonl(std::istream& is) {
  std::vector<ReferringTask> tasks;
  std::string text;
  std::size_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (text.empty()) continue;
    tasks.push_back(task_from_json(detail::parse_line(text, line), line));
  }
  return tasks;
}

// ---- predictions / responses ----------------------------------------------

inline std::string prediction_to_jsonl(const PredictionRecord& rec) {
  std::string out = "{\"v\":1,\"task_id\":" + json_quote(rec.task_id);
  if (rec.raw_response) {
    out += ",\"raw_response\":" + json_quote(*rec.raw_response);
  } else {
    out += ",\"boxes\":[";
    for (std::size_t i = 0; i < rec.boxes.size(); ++i) {
      if (i) out += ",";
      out += "{\"label\":" + json_quote(rec.boxes[i].label) +
             ",\"box\":" + detail::box_json(rec.boxes[i].box) + "}";
    }
    out += "]";
  }
  return out + "}";
}

inline void write_predictions_jsonl(std::ostream& os,
                                    const std::vector<PredictionRecord>& recs) {
  for (const auto& r : recs) os << prediction_to_jsonl(r) << "\n";
}

// Accepts either form. A raw_response record derives its boxes from the
// parsed answer; an explicit boxes record stands alone (empty = rejection).
inline PredictionRecord prediction_from_json(const nlohmann::json& j, std::size_t line) {
  using namespace detail;
  check_version(j, line);
  check_keys(j, {"v", "task_id"}, {"raw_response", "boxes"}, line);
  const bool has_raw = j.contains("raw_response");
  const bool has_boxes = j.contains("boxes");
  if (has_raw == has_boxes)
    fail_line(line, "record must carry exactly one of \"raw_response\" / \"boxes\"");

  const std::string task_id = get_string(j, "task_id", line);
  if (task_id.empty()) fail_line(line, "empty task_id");

  if (has_raw) {
    return PredictionRecord::from_raw(task_id, get_string(j, "raw_response", line));
  }

  PredictionRecord rec;
  rec.task_id = task_id;
  if (!j["boxes"].is_array()) fail_line(line, "\"boxes\" must be an array");
  for (const auto& b : j["boxes"]) {
    if (!b.is_object()) fail_line(line, "box entry must be an object");
    check_keys(b, {"label", "box"}, {}, line);
    rec.boxes.push_back({get_string(b, "label", line), get_box(b["box"], line)});
  }
  return rec;
}

inline std::vector<PredictionRecord> read_predictions_jsonl(std::istream& is) {
  std::vector<PredictionRecord> recs;
  std::string text;
  std::size_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (text.empty()) continue;
    recs.push_back(prediction_from_json(detail::parse_line(text, line), line));
  }
  return recs;
}

// ---- reward rows ------------------------------------------------------------

inline std::string reward_row_to_jsonl(const std::string& task_id,
                                       const RewardBreakdown& r) {
  return "{\"v\":1,\"task_id\":" + json_quote(task_id) +
         ",\"precision\":" + fmt_g9(r.precision) + ",\"recall\":" + fmt_g9(r.recall) +
         ",\"f1\":" + fmt_g9(r.f1) + ",\"fmt\":" + fmt_g9(r.fmt) +
         ",\"total\":" + fmt_g9(r.total) + "}";
}

// ---- training artifacts -----------------------------------------------------

inline std::string train_record_to_jsonl(const TrainRecord& rec) {
  return "{\"v\":1,\"iter\":" + std::to_string(rec.iter) +
         ",\"mean_reward\":" + fmt_g9(rec.mean_reward) +
         ",\"objective\":" + fmt_g9(rec.objective) +
         ",\"mean_kl\":" + fmt_g9(rec.mean_kl) +
         ",\"clip_fraction\":" + fmt_g9(rec.clip_fraction) + "}";
}

inline std::string params_to_json(const ToyPolicyParams& params) {
  std::string out = "{\"v\":1,\"dim\":" + std::to_string(params.weights.size()) +
                    ",\"weights\":[";
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    if (i) out += ",";
    out += fmt_g9(params.weights[i]);
  }
  return out + "]}";
}

inline ToyPolicyParams params_from_json_text(const std::string& text) {
  using namespace detail;
  const nlohmann::json j = parse_line(text, 1);
  check_version(j, 1);
  check_keys(j, {"v", "dim", "weights"}, {}, 1);
  if (!j["weights"].is_array()) fail_line(1, "\"weights\" must be an array");
  ToyPolicyParams params;
  for (const auto& w : j["weights"]) {
    if (!w.is_number()) fail_line(1, "weights must be numbers");
    params.weights.push_back(w.get<double>());
  }
  if (!j["dim"].is_number_integer() ||
      j["dim"].get<std::size_t>() != params.weights.size())
    fail_line(1, "\"dim\" does not match the weight count");
  return params;
}

// ---- evaluation report ------------------------------------------------------

inline std::string eval_report_to_json(const EvalReport& report) {
  std::string out = "{\n  \"v\": 1,\n  \"threshold_grid\": [";
  for (std::size_t i = 0; i < report.threshold_grid.size(); ++i) {
    if (i) out += ", ";
    out += fmt_g9(report.threshold_grid[i]);
  }
  out += "],\n  \"per_subset\": {";
  bool first = true;
  for (const auto& [tag, m] : report.per_subset) {
    if (!first) out += ",";
    first = false;
    out += "\n    " + json_quote(to_string(tag)) + ": {\"recall\": " + fmt_g9(m.recall) +
           ", \"precision\": " + fmt_g9(m.precision) + ", \"df1\": " + fmt_g9(m.df1) +
           ", \"n_tasks\": " + std::to_string(m.n_tasks) + "}";
  }
  out += "\n  },\n  \"overall\": {\"recall\": " + fmt_g9(report.overall.recall) +
         ", \"precision\": " + fmt_g9(report.overall.precision) +
         ", \"df1\": " + fmt_g9(report.overall.df1) + "},\n  \"rejection_score\": ";
  out += report.rejection_score ? fmt_g9(*report.rejection_score) : "null";
  out += "\n}\n";
  return out;
}

inline std::string eval_report_to_csv(const EvalReport& report) {
  std::string out = "subset,recall,precision,df1,n_tasks\n";
  std::size_t n_overall = 0;
  for (const auto& [tag, m] : report.per_subset) {
    out += std::string(to_string(tag)) + "," + fmt_g9(m.recall) + "," +
           fmt_g9(m.precision) + "," + fmt_g9(m.df1) + "," + std::to_string(m.n_tasks) +
           "\n";
    if (tag != SubsetTag::rejection) n_overall += m.n_tasks;
  }
  out += "overall," + fmt_g9(report.overall.recall) + "," +
         fmt_g9(report.overall.precision) + "," + fmt_g9(report.overall.df1) + "," +
         std::to_string(n_overall) + "\n";
  return out;
}

}  // namespace refrl
