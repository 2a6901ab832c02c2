#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "refrl/policy.hpp"

namespace refrl {

// Group-relative policy optimization over whole-response rewards: rewards
// are normalized within each group of rollouts for the same task, and the
// clipped importance-weighted surrogate minus a KL penalty to a frozen
// reference policy is ascended.

// Per-token log-probabilities for one response under the current, rollout
// (old), and frozen reference policies. Invariant: the three lists have
// equal nonzero length and entries are finite and <= 0.
struct TokenLogProbs {
  std::vector<double> current;
  std::vector<double> old;
  std::vector<double> ref;
};

struct RolloutSample {
  std::string raw;  // serialized response text; rewards are computed from it
  TokenLogProbs logprobs;
  double reward = 0.0;
};

// G rollouts for one task.
struct RolloutGroup {
  std::string task_id;
  std::vector<RolloutSample> responses;
};

// Direction of the probability ratio inside the KL estimator
// x - log x - 1. `current_over_ref` uses x = pi / pi_ref; `ref_over_current`
// is the reverse ratio, selectable for comparison runs.
enum class KlForm { current_over_ref, ref_over_current };

struct GrpoConfig {
  int group_size = 8;
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  double temperature = 1.0;
  // Sized for the toy linear policy. Fixed-step ascent is only stable while
  // lr * kl_beta stays moderate; 0.01 keeps kl_beta = 100 convergent.
  double learning_rate = 0.01;
  double std_floor = 0.0;       // groups with reward std <= floor get zero advantages
  int batch_size = 8;           // tasks sampled per iteration
  std::uint64_t seed = 0;
  KlForm kl_form = KlForm::current_over_ref;
};

inline void validate(const GrpoConfig& cfg) {
  if (cfg.group_size < 2) throw std::invalid_argument("GrpoConfig: group_size must be >= 2");
  if (!(cfg.clip_epsilon > 0.0 && cfg.clip_epsilon < 1.0))
    throw std::invalid_argument("GrpoConfig: clip_epsilon must be in (0, 1)");
  if (!(cfg.kl_beta >= 0.0)) throw std::invalid_argument("GrpoConfig: kl_beta must be >= 0");
  if (!(cfg.temperature > 0.0))
    throw std::invalid_argument("GrpoConfig: temperature must be > 0");
  if (!std::isfinite(cfg.learning_rate))
    throw std::invalid_argument("GrpoConfig: learning_rate must be finite");
  if (!(cfg.std_floor >= 0.0))
    throw std::invalid_argument("GrpoConfig: std_floor must be >= 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("GrpoConfig: batch_size must be >= 1");
}

// Group-normalized advantages: (r - mean) / population std. A group whose
// std is at or below std_floor is degenerate and gets all-zero advantages
// instead of a blow-up. Requires at least two rewards.
inline std::vector<double> normalize_advantages(const std::vector<double>& rewards,
                                                double std_floor = 0.0) {
  if (rewards.size() < 2)
    throw std::invalid_argument("normalize_advantages: need at least two rewards");
  for (double r : rewards) {
    if (!std::isfinite(r))
      throw std::invalid_argument("normalize_advantages: rewards must be finite");
  }
  // An all-equal group has zero spread by definition; short-circuit before
  // the moment computation can turn summation residue into +-1 advantages.
  bool all_equal = true;
  for (double r : rewards) all_equal = all_equal && r == rewards.front();
  if (all_equal) return std::vector<double>(rewards.size(), 0.0);

  const auto n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double std = std::sqrt(var);

  std::vector<double> adv(rewards.size(), 0.0);
  if (std <= std_floor) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / std;
  return adv;
}

// exp(logp_current - logp_old), computed in log space.
inline double importance_ratio(double logp_current, double logp_old) {
  return std::exp(logp_current - logp_old);
}

// Per-token KL estimate x - log x - 1 with x the configured probability
// ratio. Written as expm1(d) - d with d = log x, which is exact at d = 0
// and never rounds below zero.
inline double kl_term(double logp_current, double logp_ref,
                      KlForm form = KlForm::current_over_ref) {
  const double d =
      form == KlForm::current_over_ref ? logp_current - logp_ref : logp_ref - logp_current;
  return std::expm1(d) - d;
}

namespace detail {

inline void check_group(const RolloutGroup& group) {
  if (group.responses.size() < 2)
    throw std::invalid_argument("rollout group needs at least two responses");
  for (const auto& r : group.responses) {
    const auto& lp = r.logprobs;
    if (lp.current.empty() || lp.current.size() != lp.old.size() ||
        lp.current.size() != lp.ref.size())
      throw std::invalid_argument("token log-prob lists must have equal nonzero length");
    for (std::size_t t = 0; t < lp.current.size(); ++t) {
      if (!std::isfinite(lp.current[t]) || !std::isfinite(lp.old[t]) ||
          !std::isfinite(lp.ref[t]) || lp.current[t] > 0.0 || lp.old[t] > 0.0 ||
          lp.ref[t] > 0.0)
        throw std::invalid_argument("token log-probs must be finite and <= 0");
    }
    if (!std::isfinite(r.reward))
      throw std::invalid_argument("rollout rewards must be finite");
  }
}

}  // namespace detail

// Objective for one group:
//
//   J = (1/G) sum_i (1/|o_i|) sum_t [ min(rho A_i, clip(rho, 1-eps, 1+eps) A_i)
//                                     - beta * kl_t ]
//
// with rho the per-token importance ratio and A_i the group-normalized
// advantage of response i.
inline double grpo_objective(const RolloutGroup& group, const GrpoConfig& cfg) {
  validate(cfg);
  detail::check_group(group);

  std::vector<double> rewards;
  rewards.reserve(group.responses.size());
  for (const auto& r : group.responses) rewards.push_back(r.reward);
  const std::vector<double> adv = normalize_advantages(rewards, cfg.std_floor);

  const double lo = 1.0 - cfg.clip_epsilon;
  const double hi = 1.0 + cfg.clip_epsilon;
  double sum_i = 0.0;
  for (std::size_t i = 0; i < group.responses.size(); ++i) {
    const auto& lp = group.responses[i].logprobs;
    const double a = adv[i];
    double sum_t = 0.0;
    for (std::size_t t = 0; t < lp.current.size(); ++t) {
      const double rho = importance_ratio(lp.current[t], lp.old[t]);
      const double surrogate = std::min(rho * a, std::clamp(rho, lo, hi) * a);
      sum_t += surrogate - cfg.kl_beta * kl_term(lp.current[t], lp.ref[t], cfg.kl_form);
    }
    sum_i += sum_t / static_cast<double>(lp.current.size());
  }
  return sum_i / static_cast<double>(group.responses.size());
}

// Recomputation context for one response: the feature row and sampled
// decision for each token, enough to rebuild its current log-probs from any
// parameter vector.
struct ResponseContext {
  std::vector<std::vector<double>> token_features;
  std::vector<std::uint8_t> included;
};

using GroupContext = std::vector<ResponseContext>;

// Analytic gradient of the summed per-group objective with respect to the
// policy weights. Only the current log-probs depend on the weights; old and
// ref entries are constants. The min/clip pair acts as a piecewise-constant
// selector, and at the clip boundary the unclipped branch is taken.
inline std::vector<double> grpo_gradient(const ToyPolicyParams& params,
                                         const std::vector<RolloutGroup>& groups,
                                         const std::vector<GroupContext>& contexts,
                                         const GrpoConfig& cfg) {
  validate(cfg);
  if (groups.size() != contexts.size())
    throw std::invalid_argument("grpo_gradient: one context per group required");

  const std::size_t dim = params.weights.size();
  std::vector<double> grad(dim, 0.0);

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const RolloutGroup& group = groups[g];
    const GroupContext& ctx = contexts[g];
    detail::check_group(group);
    if (ctx.size() != group.responses.size())
      throw std::invalid_argument("grpo_gradient: context size mismatch for task " +
                                  group.task_id);

    std::vector<double> rewards;
    rewards.reserve(group.responses.size());
    for (const auto& r : group.responses) rewards.push_back(r.reward);
    const std::vector<double> adv = normalize_advantages(rewards, cfg.std_floor);

    const double lo = 1.0 - cfg.clip_epsilon;
    const double hi = 1.0 + cfg.clip_epsilon;
    const auto group_size = static_cast<double>(group.responses.size());

    for (std::size_t i = 0; i < group.responses.size(); ++i) {
      const auto& lp = group.responses[i].logprobs;
      const ResponseContext& rc = ctx[i];
      if (rc.token_features.size() != lp.current.size() ||
          rc.included.size() != lp.current.size())
        throw std::invalid_argument("grpo_gradient: token count mismatch for task " +
                                    group.task_id);

      const double a = adv[i];
      const double scale = 1.0 / (group_size * static_cast<double>(lp.current.size()));

      for (std::size_t t = 0; t < lp.current.size(); ++t) {
        const auto& phi = rc.token_features[t];
        if (phi.size() != dim)
          throw std::invalid_argument("grpo_gradient: feature dimension mismatch");
        const bool included = rc.included[t] != 0;

        const double s = include_score(params.weights, phi, cfg.temperature);
        const double lc = token_logprob(s, included);
        const double rho = importance_ratio(lc, lp.old[t]);

        // Surrogate branch: the unclipped term is active (and supplies the
        // subgradient at the boundary) iff it is the min.
        const bool unclipped = a >= 0.0 ? rho <= hi : rho >= lo;
        const double dsurr_dlc = unclipped ? rho * a : 0.0;

        double dkl_dlc;
        if (cfg.kl_form == KlForm::current_over_ref) {
          dkl_dlc = std::exp(lc - lp.ref[t]) - 1.0;
        } else {
          dkl_dlc = 1.0 - std::exp(lp.ref[t] - lc);
        }

        const double coef =
            (dsurr_dlc - cfg.kl_beta * dkl_dlc) * scale * token_logprob_dscore(s, included);
        for (std::size_t j = 0; j < dim; ++j) {
          grad[j] += coef * phi[j] / cfg.temperature;
        }
      }
    }
  }
  return grad;
}

}  // namespace refrl
