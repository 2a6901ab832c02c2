#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "refrl/grpo.hpp"
#include "refrl/metrics.hpp"
#include "refrl/rng.hpp"
#include "refrl/toyenv.hpp"

namespace refrl {

// Single-threaded GRPO training loop over the toy environment. Each
// iteration snapshots the current policy, rolls out group_size responses
// for each of batch_size sampled tasks under that snapshot, and takes one
// ascent step on the summed per-group objective. The reference policy is
// frozen at the initial parameters for the whole run.

struct TrainRecord {
  int iter = 0;
  double mean_reward = 0.0;
  double objective = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;

  friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

struct TrainResult {
  ToyPolicyParams params;
  std::vector<TrainRecord> log;
};

inline TrainResult train(const std::vector<ReferringTask>& tasks,
                         const ToyPolicyParams& init, const GrpoConfig& cfg,
                         int iterations) {
  validate(cfg);
  if (iterations < 0) throw std::invalid_argument("train: iterations must be >= 0");
  if (tasks.empty()) throw std::invalid_argument("train: task pool is empty");
  if (init.weights.size() != kFeatureDim)
    throw std::invalid_argument("train: policy dimension must be " +
                                std::to_string(kFeatureDim));
  for (double w : init.weights)
    if (!std::isfinite(w))
      throw std::invalid_argument("train: initial weights must be finite");

  TrainResult result;
  result.params = init;
  const ToyPolicyParams ref = init;

  for (int iter = 0; iter < iterations; ++iter) {
    // Rollouts are sampled under the snapshot taken here; the single ascent
    // step below happens after all groups are collected.
    const ToyPolicyParams snapshot = result.params;

    auto batch_rng = derive_stream(cfg.seed, "batch", {static_cast<std::uint64_t>(iter)});
    std::vector<std::size_t> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int b = 0; b < cfg.batch_size; ++b) {
      batch.push_back(static_cast<std::size_t>(
          batch_rng.uniform_int(0, static_cast<std::int64_t>(tasks.size()) - 1)));
    }

    std::vector<RolloutGroup> groups;
    std::vector<GroupContext> contexts;
    groups.reserve(batch.size());
    contexts.reserve(batch.size());

    double reward_sum = 0.0, kl_sum = 0.0;
    std::size_t n_rollouts = 0, n_tokens = 0, n_clipped = 0;

    for (std::size_t b = 0; b < batch.size(); ++b) {
      const ReferringTask& task = tasks[batch[b]];
      RolloutGroup group;
      group.task_id = task.task_id;
      GroupContext ctx;

      for (int g = 0; g < cfg.group_size; ++g) {
        auto rng = derive_stream(
            cfg.seed, "rollout",
            {static_cast<std::uint64_t>(iter), static_cast<std::uint64_t>(b),
             static_cast<std::uint64_t>(g)});
        RolloutResult r = rollout(snapshot, task, cfg, rng);
        r.logprobs.ref = policy_logprob(ref, task, r.selection, cfg.temperature);

        reward_sum += r.reward.total;
        ++n_rollouts;
        for (std::size_t t = 0; t < r.logprobs.current.size(); ++t) {
          kl_sum += kl_term(r.logprobs.current[t], r.logprobs.ref[t], cfg.kl_form);
          const double rho = importance_ratio(r.logprobs.current[t], r.logprobs.old[t]);
          if (rho < 1.0 - cfg.clip_epsilon || rho > 1.0 + cfg.clip_epsilon) ++n_clipped;
          ++n_tokens;
        }

        ctx.push_back(response_context(task, r.selection));
        group.responses.push_back(
            {std::move(r.raw), std::move(r.logprobs), r.reward.total});
      }
      groups.push_back(std::move(group));
      contexts.push_back(std::move(ctx));
    }

    double objective = 0.0;
    for (const auto& g : groups) objective += grpo_objective(g, cfg);
    objective /= static_cast<double>(groups.size());

    const std::vector<double> grad = grpo_gradient(snapshot, groups, contexts, cfg);

    auto bad = [&](const char* what) {
      return std::runtime_error("train: non-finite " + std::string(what) +
                                " at iteration " + std::to_string(iter) + " (task " +
                                groups.front().task_id + ")");
    };
    if (!std::isfinite(objective)) throw bad("objective");
    for (double gj : grad) {
      if (!std::isfinite(gj)) throw bad("gradient");
    }

    for (std::size_t j = 0; j < grad.size(); ++j) {
      result.params.weights[j] += cfg.learning_rate * grad[j];
    }

    TrainRecord rec;
    rec.iter = iter;
    rec.mean_reward = reward_sum / static_cast<double>(n_rollouts);
    rec.objective = objective;
    rec.mean_kl = kl_sum / static_cast<double>(n_tokens);
    rec.clip_fraction =
        static_cast<double>(n_clipped) / static_cast<double>(n_tokens);
    result.log.push_back(rec);
  }
  return result;
}

// Held-out benchmark companion to a training spec: same shape, disjoint
// seed stream.
inline SyntheticSpec holdout_spec(const SyntheticSpec& base, int n_tasks) {
  SyntheticSpec spec = base;
  spec.n_tasks = n_tasks;
  spec.seed = derive_seed(base.seed, "holdout");
  return spec;
}

// Greedy-decoded predictions, routed through the serialized response text
// like any other output.
inline std::vector<PredictionRecord> greedy_predictions(
    const ToyPolicyParams& params, const std::vector<ReferringTask>& tasks,
    double temperature) {
  std::vector<PredictionRecord> records;
  records.reserve(tasks.size());
  for (const auto& task : tasks) {
    const auto selection = decode_greedy(params, task, temperature);
    records.push_back(
        PredictionRecord::from_raw(task.task_id, build_response_text(task, selection)));
  }
  return records;
}

}  // namespace refrl
