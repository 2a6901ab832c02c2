// Command-line front end: task generation, response validation, reward
// scoring, benchmark evaluation, prompt rendering, and toy GRPO training.
//
// Exit codes: 0 success, 1 data error, 2 usage error. All outputs are
// byte-deterministic under fixed inputs and seed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "refrl/cot.hpp"
#include "refrl/jsonl.hpp"
#include "refrl/metrics.hpp"
#include "refrl/reward.hpp"
#include "refrl/toyenv.hpp"
#include "refrl/trainer.hpp"

namespace {

// Raised for problems that are the caller's fault (bad flags, unreadable
// paths); mapped to exit code 2 rather than 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open input file: " + path);
  return f;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot open output file: " + path);
  return f;
}

// Writes to the file when a path is given, else to stdout.
void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    auto f = open_output(path);
    f << content;
  }
}

template <typename Fn>
void check_flags(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

struct GenArgs {
  refrl::SyntheticSpec spec;
  std::string out;
};

int run_gen_tasks(const GenArgs& args) {
  check_flags([&] { refrl::validate(args.spec); });
  const auto tasks = refrl::generate_tasks(args.spec);
  std::string out;
  for (const auto& t : tasks) out += refrl::task_to_jsonl(t) + "\n";
  emit(args.out, out);
  return 0;
}

struct ValidateArgs {
  std::string responses;
  std::string out;
};

// Reports per line and never fails on content; only an unreadable input is
// an error.
int run_validate(const ValidateArgs& args) {
  auto in = open_input(args.responses);
  std::string text, out;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;

    std::string error;
    std::string raw;
    const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      error = "invalid JSON";
    } else if (!j.contains("v") || !j["v"].is_number_integer() ||
               j["v"].get<int>() != refrl::kSchemaVersion) {
      error = "unsupported schema version";
    } else if (!j.contains("raw_response") || !j["raw_response"].is_string()) {
      error = "missing raw_response";
    } else {
      raw = j["raw_response"].get<std::string>();
    }

    bool format_ok = false;
    refrl::AnswerKind kind = refrl::AnswerKind::unparseable;
    if (error.empty()) {
      const auto parsed = refrl::parse_response(raw);
      format_ok = parsed.format_ok;
      kind = parsed.answer.kind;
    }

    out += "{\"v\":1,\"line\":" + std::to_string(line) +
           ",\"format_ok\":" + (format_ok ? "true" : "false") +
           ",\"answer_kind\":" + refrl::json_quote(to_string(kind)) + ",\"errors\":[";
    if (!error.empty()) out += refrl::json_quote(error);
    out += "]}\n";
  }
  emit(args.out, out);
  return 0;
}

struct RewardArgs {
  std::string tasks;
  std::string responses;
  refrl::RewardConfig cfg;
  std::string out;
};

int run_reward(const RewardArgs& args) {
  check_flags([&] { refrl::validate(args.cfg); });
  auto tasks_in = open_input(args.tasks);
  auto responses_in = open_input(args.responses);
  const auto tasks = refrl::read_tasks_jsonl(tasks_in);
  const auto responses = refrl::read_predictions_jsonl(responses_in);

  std::map<std::string, const refrl::ReferringTask*> by_id;
  for (const auto& t : tasks) by_id.emplace(t.task_id, &t);

  std::string out;
  for (const auto& rec : responses) {
    const auto it = by_id.find(rec.task_id);
    if (it == by_id.end()) throw std::runtime_error("unknown task id: " + rec.task_id);
    if (!rec.raw_response)
      throw std::runtime_error("record for task " + rec.task_id +
                               " has no raw_response to score");
    const auto r = refrl::reward_response(*it->second, *rec.raw_response, args.cfg);
    out += refrl::reward_row_to_jsonl(rec.task_id, r) + "\n";
  }
  emit(args.out, out);
  return 0;
}

struct EvalArgs {
  std::string tasks;
  std::string predictions;
  double iou_min = 0.50;
  double iou_max = 0.95;
  double iou_step = 0.05;
  std::string out;
  std::string csv;
};

int run_eval(const EvalArgs& args) {
  std::vector<double> grid;
  if (args.iou_min == 0.50 && args.iou_max == 0.95 && args.iou_step == 0.05) {
    grid = refrl::default_threshold_grid();
  } else {
    if (!(args.iou_step > 0.0)) throw UsageError("--iou-step must be > 0");
    for (int k = 0;; ++k) {
      const double t = args.iou_min + k * args.iou_step;
      if (t > args.iou_max + 1e-9) break;
      grid.push_back(t);
    }
    check_flags([&] { refrl::detail::check_grid(grid); });
  }

  auto tasks_in = open_input(args.tasks);
  auto preds_in = open_input(args.predictions);
  const auto tasks = refrl::read_tasks_jsonl(tasks_in);
  const auto preds = refrl::read_predictions_jsonl(preds_in);

  const auto report = refrl::evaluate(tasks, preds, grid);
  emit(args.out, refrl::eval_report_to_json(report));
  if (!args.csv.empty()) emit(args.csv, refrl::eval_report_to_csv(report));
  return 0;
}

struct RenderArgs {
  std::string tasks;
  std::string out;
};

int run_render_prompt(const RenderArgs& args) {
  auto tasks_in = open_input(args.tasks);
  const auto tasks = refrl::read_tasks_jsonl(tasks_in);
  std::string out;
  for (const auto& t : tasks) {
    out += "{\"v\":1,\"task_id\":" + refrl::json_quote(t.task_id) +
           ",\"prompt\":" + refrl::json_quote(refrl::render_prompt(t)) + "}\n";
  }
  emit(args.out, out);
  return 0;
}

struct TrainArgs {
  refrl::SyntheticSpec spec;
  refrl::GrpoConfig cfg;
  int iterations = 500;
  int holdout_n = 100;
  std::string kl_form = "forward";
  std::string out_dir;
};

int run_train_toy(TrainArgs args) {
  args.spec.seed = args.cfg.seed;
  if (args.kl_form == "forward") {
    args.cfg.kl_form = refrl::KlForm::current_over_ref;
  } else if (args.kl_form == "reverse") {
    args.cfg.kl_form = refrl::KlForm::ref_over_current;
  } else {
    throw UsageError("--kl-form must be \"forward\" or \"reverse\"");
  }
  check_flags([&] {
    refrl::validate(args.spec);
    refrl::validate(args.cfg);
    if (args.iterations < 0) throw std::invalid_argument("--iterations must be >= 0");
    if (args.holdout_n < 1) throw std::invalid_argument("--holdout-n must be >= 1");
  });
  if (args.out_dir.empty()) throw UsageError("--out-dir is required");

  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec) throw UsageError("cannot create output directory: " + args.out_dir);

  const auto tasks = refrl::generate_tasks(args.spec);
  const refrl::ToyPolicyParams init{std::vector<double>(refrl::kFeatureDim, 0.0)};
  const auto result = refrl::train(tasks, init, args.cfg, args.iterations);

  const auto holdout = refrl::generate_tasks(refrl::holdout_spec(args.spec, args.holdout_n));
  const auto records =
      refrl::greedy_predictions(result.params, holdout, args.cfg.temperature);
  const auto report = refrl::evaluate(holdout, records);

  const auto dir = std::filesystem::path(args.out_dir);
  emit((dir / "params.json").string(), refrl::params_to_json(result.params) + "\n");
  std::string log;
  for (const auto& rec : result.log) log += refrl::train_record_to_jsonl(rec) + "\n";
  emit((dir / "train_log.jsonl").string(), log);
  emit((dir / "eval_report.json").string(), refrl::eval_report_to_json(report));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded referring toolkit: structured box-grounding responses, "
               "exact-match rewards, benchmark metrics, and a toy GRPO trainer."};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a config file");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-tasks", "Generate synthetic referring tasks");
  gen_cmd->add_option("--n", gen.spec.n_tasks, "Number of tasks")->capture_default_str();
  gen_cmd->add_option("--seed", gen.spec.seed, "Root seed")->capture_default_str();
  gen_cmd->add_option("--rejection-fraction", gen.spec.rejection_fraction,
                      "Fraction of tasks whose right answer is rejection")
      ->capture_default_str();
  gen_cmd->add_option("--cand-min", gen.spec.candidates_min, "Minimum candidates per task")
      ->capture_default_str();
  gen_cmd->add_option("--cand-max", gen.spec.candidates_max, "Maximum candidates per task")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output tasks JSONL (default stdout)");

  ValidateArgs val;
  auto* val_cmd =
      app.add_subcommand("validate", "Check response envelopes and answer payloads");
  val_cmd->add_option("--responses", val.responses, "Responses JSONL")->required();
  val_cmd->add_option("--out", val.out, "Output report JSONL (default stdout)");

  RewardArgs rew;
  auto* rew_cmd = app.add_subcommand("reward", "Score raw responses against tasks");
  rew_cmd->add_option("--tasks", rew.tasks, "Tasks JSONL")->required();
  rew_cmd->add_option("--responses", rew.responses, "Responses JSONL")->required();
  rew_cmd->add_option("--lambda", rew.cfg.lambda, "Accuracy weight in the total reward")
      ->capture_default_str();
  rew_cmd->add_option("--tol", rew.cfg.match_tol, "Coordinate tolerance for exact match")
      ->capture_default_str();
  rew_cmd->add_option("--out", rew.out, "Output rewards JSONL (default stdout)");

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "Evaluate predictions on a benchmark");
  ev_cmd->add_option("--tasks", ev.tasks, "Tasks JSONL")->required();
  ev_cmd->add_option("--predictions", ev.predictions, "Predictions JSONL")->required();
  ev_cmd->add_option("--iou-min", ev.iou_min, "Lowest IoU threshold")->capture_default_str();
  ev_cmd->add_option("--iou-max", ev.iou_max, "Highest IoU threshold")->capture_default_str();
  ev_cmd->add_option("--iou-step", ev.iou_step, "Threshold step")->capture_default_str();
  ev_cmd->add_option("--out", ev.out, "Output report JSON (default stdout)");
  ev_cmd->add_option("--csv", ev.csv, "Also write per-subset rows as CSV");

  RenderArgs ren;
  auto* ren_cmd = app.add_subcommand("render-prompt", "Render full prompts for tasks");
  ren_cmd->add_option("--tasks", ren.tasks, "Tasks JSONL")->required();
  ren_cmd->add_option("--out", ren.out, "Output prompts JSONL (default stdout)");

  TrainArgs tr;
  auto* tr_cmd =
      app.add_subcommand("train-toy", "Train the toy policy with GRPO and evaluate it");
  tr_cmd->add_option("--n-tasks", tr.spec.n_tasks, "Training pool size")->capture_default_str();
  tr_cmd->add_option("--rejection-fraction", tr.spec.rejection_fraction,
                     "Fraction of rejection tasks")
      ->capture_default_str();
  tr_cmd->add_option("--cand-min", tr.spec.candidates_min, "Minimum candidates per task")
      ->capture_default_str();
  tr_cmd->add_option("--cand-max", tr.spec.candidates_max, "Maximum candidates per task")
      ->capture_default_str();
  tr_cmd->add_option("--iterations", tr.iterations, "Training iterations")
      ->capture_default_str();
  tr_cmd->add_option("--seed", tr.cfg.seed, "Root seed for generation and rollouts")
      ->capture_default_str();
  tr_cmd->add_option("--group-size", tr.cfg.group_size, "Rollouts per task group")
      ->capture_default_str();
  tr_cmd->add_option("--batch-size", tr.cfg.batch_size, "Tasks per iteration")
      ->capture_default_str();
  tr_cmd->add_option("--beta", tr.cfg.kl_beta, "KL penalty weight")->capture_default_str();
  tr_cmd->add_option("--epsilon", tr.cfg.clip_epsilon, "Clip range half-width")
      ->capture_default_str();
  tr_cmd->add_option("--temperature", tr.cfg.temperature, "Sampling temperature")
      ->capture_default_str();
  tr_cmd->add_option("--lr", tr.cfg.learning_rate, "Learning rate")->capture_default_str();
  tr_cmd->add_option("--std-floor", tr.cfg.std_floor,
                     "Reward-std floor below which a group gets zero advantages")
      ->capture_default_str();
  tr_cmd->add_option("--kl-form", tr.kl_form,
                     "KL ratio direction: \"forward\" (policy/reference) or \"reverse\"")
      ->capture_default_str();
  tr_cmd->add_option("--holdout-n", tr.holdout_n, "Held-out benchmark size")
      ->capture_default_str();
  tr_cmd->add_option("--out-dir", tr.out_dir,
                     "Directory for params.json, train_log.jsonl, eval_report.json")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(gen_cmd)) return run_gen_tasks(gen);
    if (app.got_subcommand(val_cmd)) return run_validate(val);
    if (app.got_subcommand(rew_cmd)) return run_reward(rew);
    if (app.got_subcommand(ev_cmd)) return run_eval(ev);
    if (app.got_subcommand(ren_cmd)) return run_render_prompt(ren);
    if (app.got_subcommand(tr_cmd)) return run_train_toy(tr);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
