#include "refrl/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "refrl/rng.hpp"

namespace refrl {
namespace {

TEST(NormalizeAdvantages, TwoPointGroup) {
  const auto adv = normalize_advantages({1.0, 0.0});
  ASSERT_EQ(adv.size(), 2u);
  EXPECT_EQ(adv[0], 1.0);
  EXPECT_EQ(adv[1], -1.0);
}

TEST(NormalizeAdvantages, OneHotGroup) {
  // mean 1/4, population std sqrt(3)/4.
  const auto adv = normalize_advantages({1.0, 0.0, 0.0, 0.0});
  EXPECT_NEAR(adv[0], std::sqrt(3.0), 1e-12);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(adv[i], -1.0 / std::sqrt(3.0), 1e-12);
}

TEST(NormalizeAdvantages, DegenerateGroupIsZero) {
  // 0.7 sums inexactly over three terms; the all-equal short circuit must
  // win before rounding residue reaches the divide.
  for (double v : {0.0, 0.5, 0.7, 1.0}) {
    const auto adv = normalize_advantages({v, v, v});
    EXPECT_EQ(adv, (std::vector<double>{0.0, 0.0, 0.0}));
  }
}

TEST(NormalizeAdvantages, StdFloor) {
  const std::vector<double> rewards{0.5, 0.5 + 1e-4};
  EXPECT_NE(normalize_advantages(rewards, 0.0)[0], 0.0);
  EXPECT_EQ(normalize_advantages(rewards, 1e-3),
            (std::vector<double>{0.0, 0.0}));
}

TEST(NormalizeAdvantages, InvalidInputsThrow) {
  EXPECT_THROW(normalize_advantages({}), std::invalid_argument);
  EXPECT_THROW(normalize_advantages({1.0}), std::invalid_argument);
  EXPECT_THROW(normalize_advantages({1.0, std::nan("")}), std::invalid_argument);
  EXPECT_THROW(normalize_advantages({1.0, INFINITY}), std::invalid_argument);
}

TEST(NormalizeAdvantages, MeanZeroStdOne) {
  auto rng = derive_stream(61, "adv-moments");
  for (int it = 0; it < 500; ++it) {
    const auto n = rng.uniform_int(2, 16);
    std::vector<double> rewards;
    for (std::int64_t i = 0; i < n; ++i) rewards.push_back(rng.uniform(0.0, 1.0));
    const auto adv = normalize_advantages(rewards);
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-9);
  }
}

TEST(NormalizeAdvantages, ShiftAndScaleInvariant) {
  auto rng = derive_stream(62, "adv-invariance");
  for (int it = 0; it < 500; ++it) {
    const auto n = rng.uniform_int(2, 12);
    std::vector<double> rewards;
    for (std::int64_t i = 0; i < n; ++i) rewards.push_back(rng.uniform(0.0, 1.0));
    const double shift = rng.uniform(-5.0, 5.0);
    const double scale = rng.uniform(0.1, 10.0);
    const auto base = normalize_advantages(rewards);
    std::vector<double> shifted = rewards, scaled = rewards;
    for (double& r : shifted) r += shift;
    for (double& r : scaled) r *= scale;
    const auto adv_shift = normalize_advantages(shifted);
    const auto adv_scale = normalize_advantages(scaled);
    for (std::int64_t i = 0; i < n; ++i) {
      EXPECT_NEAR(adv_shift[static_cast<std::size_t>(i)], base[static_cast<std::size_t>(i)], 1e-9);
      EXPECT_NEAR(adv_scale[static_cast<std::size_t>(i)], base[static_cast<std::size_t>(i)], 1e-9);
    }
  }
}

TEST(ImportanceRatio, Identities) {
  EXPECT_EQ(importance_ratio(-0.5, -0.5), 1.0);
  EXPECT_NEAR(importance_ratio(std::log(0.3), std::log(0.6)), 0.5, 1e-15);
  auto rng = derive_stream(63, "ratio");
  for (int it = 0; it < 200; ++it) {
    const double a = -rng.uniform(0.0, 5.0), b = -rng.uniform(0.0, 5.0);
    EXPECT_NEAR(importance_ratio(a, b) * importance_ratio(b, a), 1.0, 1e-12);
  }
}

TEST(KlTerm, ClosedForms) {
  // d = log 2: x = 2, KL = 2 - log 2 - 1.
  EXPECT_NEAR(kl_term(-1.0, -1.0 - std::log(2.0)), 0.3068528194400547, 1e-9);
  // d = -log 2: x = 1/2, KL = 1/2 + log 2 - 1 = log 2 - 1/2.
  EXPECT_NEAR(kl_term(-1.0 - std::log(2.0), -1.0), 0.1931471805599453, 1e-9);
  // The reverse form swaps the two cases.
  EXPECT_NEAR(kl_term(-1.0, -1.0 - std::log(2.0), KlForm::ref_over_current),
              0.1931471805599453, 1e-9);
  EXPECT_EQ(kl_term(-0.7, -0.7), 0.0);
}

TEST(KlTerm, NonNegativeAndZeroOnlyAtEquality) {
  auto rng = derive_stream(64, "kl-nonneg");
  for (int it = 0; it < 10000; ++it) {
    const double lc = -rng.uniform(0.0, 10.0), lr = -rng.uniform(0.0, 10.0);
    for (auto form : {KlForm::current_over_ref, KlForm::ref_over_current}) {
      const double k = kl_term(lc, lr, form);
      EXPECT_GE(k, 0.0);
      if (std::abs(lc - lr) > 1e-6) EXPECT_GT(k, 0.0);
    }
    EXPECT_EQ(kl_term(lc, lc), 0.0);
  }
}

TEST(GrpoConfig, Validation) {
  EXPECT_NO_THROW(validate(GrpoConfig{}));
  auto expect_bad = [](auto mutate) {
    GrpoConfig cfg;
    mutate(cfg);
    EXPECT_THROW(validate(cfg), std::invalid_argument);
  };
  expect_bad([](GrpoConfig& c) { c.group_size = 1; });
  expect_bad([](GrpoConfig& c) { c.clip_epsilon = 0.0; });
  expect_bad([](GrpoConfig& c) { c.clip_epsilon = 1.0; });
  expect_bad([](GrpoConfig& c) { c.kl_beta = -0.1; });
  expect_bad([](GrpoConfig& c) { c.temperature = 0.0; });
  expect_bad([](GrpoConfig& c) { c.learning_rate = INFINITY; });
  expect_bad([](GrpoConfig& c) { c.std_floor = -1.0; });
  expect_bad([](GrpoConfig& c) { c.batch_size = 0; });
}

// One-token response with explicit log-probs and reward.
RolloutSample sample1(double lc, double lo, double lref, double reward) {
  RolloutSample s;
  s.logprobs = {{lc}, {lo}, {lref}};
  s.reward = reward;
  return s;
}

TEST(GrpoObjective, OnPolicyNoKlIsZero) {
  // rho = 1 everywhere makes each surrogate equal its advantage, and
  // advantages sum to zero by construction.
  GrpoConfig cfg;
  cfg.kl_beta = 0.0;
  RolloutGroup g;
  g.task_id = "t";
  auto rng = derive_stream(65, "onpolicy-zero");
  for (int it = 0; it < 100; ++it) {
    g.responses.clear();
    const auto n = rng.uniform_int(2, 8);
    for (std::int64_t i = 0; i < n; ++i) {
      const double lp = -rng.uniform(0.1, 3.0);
      g.responses.push_back(sample1(lp, lp, lp, rng.uniform(0.0, 1.0)));
    }
    EXPECT_NEAR(grpo_objective(g, cfg), 0.0, 1e-12);
  }
}

TEST(GrpoObjective, SpotValues) {
  GrpoConfig cfg;  // eps = 0.2, beta = 0.04
  const double lc = -0.5;
  // Response 0: rho = 1.5, clipped to 1.2 on advantage +1.
  // Response 1: rho = 1.0 on advantage -1. KL = 0 while ref == current.
  RolloutGroup g;
  g.task_id = "t";
  g.responses = {sample1(lc, lc - std::log(1.5), lc, 1.0),
                 sample1(lc, lc, lc, 0.0)};
  GrpoConfig no_kl = cfg;
  no_kl.kl_beta = 0.0;
  EXPECT_NEAR(grpo_objective(g, no_kl), 0.1, 1e-12);

  // Same surrogate with x = pi/pi_ref = 2 per token adds a KL penalty of
  // beta * (2 - log 2 - 1) to every response.
  for (auto& r : g.responses) r.logprobs.ref = {lc - std::log(2.0)};
  const double expected = 0.1 - 0.04 * (2.0 - std::log(2.0) - 1.0);
  EXPECT_NEAR(grpo_objective(g, cfg), expected, 1e-12);
  EXPECT_NEAR(grpo_objective(g, cfg), 0.0877258872224, 1e-9);
}

// Literal translation of the objective formula, kept independent of the
// library implementation (its own moments, naive x - log x - 1).
double oracle_objective(const RolloutGroup& g, const GrpoConfig& cfg) {
  const auto n = static_cast<double>(g.responses.size());
  double mean = 0.0;
  for (const auto& r : g.responses) mean += r.reward / n;
  double var = 0.0;
  for (const auto& r : g.responses) var += (r.reward - mean) * (r.reward - mean) / n;
  const double sd = std::sqrt(var);

  double J = 0.0;
  for (const auto& r : g.responses) {
    const double a = sd > cfg.std_floor ? (r.reward - mean) / sd : 0.0;
    double sum = 0.0;
    for (std::size_t t = 0; t < r.logprobs.current.size(); ++t) {
      const double rho = std::exp(r.logprobs.current[t] - r.logprobs.old[t]);
      const double clipped =
          std::max(1.0 - cfg.clip_epsilon, std::min(1.0 + cfg.clip_epsilon, rho));
      const double surr = std::min(rho * a, clipped * a);
      const double d = cfg.kl_form == KlForm::current_over_ref
                           ? r.logprobs.current[t] - r.logprobs.ref[t]
                           : r.logprobs.ref[t] - r.logprobs.current[t];
      const double x = std::exp(d);
      sum += surr - cfg.kl_beta * (x - std::log(x) - 1.0);
    }
    J += sum / static_cast<double>(r.logprobs.current.size());
  }
  return J / n;
}

RolloutGroup random_group(RngStream& rng, std::int64_t min_tokens = 1,
                          std::int64_t max_tokens = 5) {
  RolloutGroup g;
  g.task_id = "t";
  const auto n = rng.uniform_int(2, 8);
  for (std::int64_t i = 0; i < n; ++i) {
    RolloutSample s;
    const auto tokens = rng.uniform_int(min_tokens, max_tokens);
    for (std::int64_t t = 0; t < tokens; ++t) {
      const double lc = -rng.uniform(0.01, 3.0);
      s.logprobs.current.push_back(lc);
      s.logprobs.old.push_back(std::min(0.0, lc + rng.uniform(-0.5, 0.5)));
      s.logprobs.ref.push_back(std::min(0.0, lc + rng.uniform(-0.5, 0.5)));
    }
    s.reward = rng.uniform(0.0, 1.0);
    g.responses.push_back(s);
  }
  return g;
}

TEST(GrpoObjective, MatchesLiteralOracle) {
  auto rng = derive_stream(66, "objective-oracle");
  for (int it = 0; it < 1000; ++it) {
    const RolloutGroup g = random_group(rng);
    GrpoConfig cfg;
    cfg.clip_epsilon = rng.uniform(0.05, 0.5);
    cfg.kl_beta = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, 1.0);
    cfg.kl_form = rng.bernoulli(0.5) ? KlForm::current_over_ref : KlForm::ref_over_current;
    cfg.std_floor = rng.bernoulli(0.2) ? 0.5 : 0.0;
    EXPECT_NEAR(grpo_objective(g, cfg), oracle_objective(g, cfg), 1e-12);
  }
}

TEST(GrpoObjective, InvariantUnderResponsePermutation) {
  auto rng = derive_stream(67, "objective-perm");
  for (int it = 0; it < 200; ++it) {
    RolloutGroup g = random_group(rng);
    const GrpoConfig cfg;
    const double before = grpo_objective(g, cfg);
    rng.shuffle(g.responses);
    EXPECT_NEAR(grpo_objective(g, cfg), before, 1e-12);
  }
}

TEST(GrpoObjective, ClipInactiveEqualsUnclippedSurrogate) {
  // With rho confined to (0.905, 1.105) the clip never binds at eps = 0.2,
  // so the objective equals the unclipped importance-weighted advantage.
  auto rng = derive_stream(68, "clip-inactive");
  GrpoConfig cfg;
  cfg.kl_beta = 0.0;
  for (int it = 0; it < 300; ++it) {
    RolloutGroup g;
    g.task_id = "t";
    const auto n = rng.uniform_int(2, 6);
    for (std::int64_t i = 0; i < n; ++i) {
      RolloutSample s;
      const auto tokens = rng.uniform_int(1, 4);
      for (std::int64_t t = 0; t < tokens; ++t) {
        const double lc = -rng.uniform(0.2, 3.0);
        s.logprobs.current.push_back(lc);
        s.logprobs.old.push_back(lc + rng.uniform(-0.1, 0.1));
        s.logprobs.ref.push_back(lc);
      }
      s.reward = rng.uniform(0.0, 1.0);
      g.responses.push_back(s);
    }
    std::vector<double> rewards;
    for (const auto& r : g.responses) rewards.push_back(r.reward);
    const auto adv = normalize_advantages(rewards);
    double expected = 0.0;
    for (std::size_t i = 0; i < g.responses.size(); ++i) {
      const auto& lp = g.responses[i].logprobs;
      double sum = 0.0;
      for (std::size_t t = 0; t < lp.current.size(); ++t) {
        sum += std::exp(lp.current[t] - lp.old[t]) * adv[i];
      }
      expected += sum / static_cast<double>(lp.current.size());
    }
    expected /= static_cast<double>(g.responses.size());
    EXPECT_NEAR(grpo_objective(g, cfg), expected, 1e-12);
  }
}

TEST(GrpoObjective, RewardShiftAndScaleInvariant) {
  auto rng = derive_stream(69, "objective-invariance");
  for (int it = 0; it < 200; ++it) {
    RolloutGroup g = random_group(rng);
    const GrpoConfig cfg;
    const double before = grpo_objective(g, cfg);
    RolloutGroup shifted = g, scaled = g;
    const double shift = rng.uniform(-3.0, 3.0);
    const double scale = rng.uniform(0.2, 5.0);
    for (auto& r : shifted.responses) r.reward += shift;
    for (auto& r : scaled.responses) r.reward *= scale;
    EXPECT_NEAR(grpo_objective(shifted, cfg), before, 1e-9);
    EXPECT_NEAR(grpo_objective(scaled, cfg), before, 1e-9);
  }
}

TEST(GrpoObjective, MalformedGroupsThrow) {
  const GrpoConfig cfg;
  RolloutGroup g;
  g.task_id = "t";
  g.responses = {sample1(-1, -1, -1, 1.0)};
  EXPECT_THROW(grpo_objective(g, cfg), std::invalid_argument);  // one response

  g.responses.push_back(sample1(-1, -1, -1, 0.0));
  g.responses[1].logprobs.old.push_back(-1.0);  // length mismatch
  EXPECT_THROW(grpo_objective(g, cfg), std::invalid_argument);

  g.responses[1].logprobs = {{0.5}, {-1.0}, {-1.0}};  // positive log-prob
  EXPECT_THROW(grpo_objective(g, cfg), std::invalid_argument);

  g.responses[1].logprobs = {{-1.0}, {-1.0}, {-1.0}};
  g.responses[1].reward = INFINITY;
  EXPECT_THROW(grpo_objective(g, cfg), std::invalid_argument);
}

// A consistent (groups, contexts) instance for a given parameter vector:
// current log-probs are computed from the weights, old and ref carry
// bounded offsets that keep rho inside the clip window.
struct Instance {
  std::vector<RolloutGroup> groups;
  std::vector<GroupContext> contexts;
};

Instance make_instance(RngStream& rng, const ToyPolicyParams& params,
                       const GrpoConfig& cfg, std::size_t n_groups, bool on_policy) {
  Instance inst;
  for (std::size_t gi = 0; gi < n_groups; ++gi) {
    RolloutGroup group;
    group.task_id = "t" + std::to_string(gi);
    GroupContext ctx;
    const auto n = rng.uniform_int(2, 4);
    for (std::int64_t i = 0; i < n; ++i) {
      RolloutSample s;
      ResponseContext rc;
      const auto tokens = rng.uniform_int(1, 4);
      for (std::int64_t t = 0; t < tokens; ++t) {
        std::vector<double> phi;
        for (std::size_t j = 0; j < params.weights.size(); ++j)
          phi.push_back(rng.uniform(-1.0, 1.0));
        const bool included = rng.bernoulli(0.5);
        const double score = include_score(params.weights, phi, cfg.temperature);
        const double lc = token_logprob(score, included);
        const double lo = on_policy ? lc : std::min(-1e-9, lc + rng.uniform(-0.095, 0.095));
        const double lref = std::min(-1e-9, lc + rng.uniform(-0.095, 0.095));
        s.logprobs.current.push_back(lc);
        s.logprobs.old.push_back(lo);
        s.logprobs.ref.push_back(lref);
        rc.token_features.push_back(std::move(phi));
        rc.included.push_back(included ? 1 : 0);
      }
      // Spread rewards so advantages are nonzero.
      s.reward = i < 2 ? static_cast<double>(i) : rng.uniform(0.0, 1.0);
      group.responses.push_back(std::move(s));
      ctx.push_back(std::move(rc));
    }
    inst.groups.push_back(std::move(group));
    inst.contexts.push_back(std::move(ctx));
  }
  return inst;
}

// Current log-probs recomputed from w; old, ref, and rewards unchanged.
std::vector<RolloutGroup> rebuild_current(const Instance& inst, const ToyPolicyParams& w,
                                          double temperature) {
  std::vector<RolloutGroup> groups = inst.groups;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i = 0; i < groups[g].responses.size(); ++i) {
      const ResponseContext& rc = inst.contexts[g][i];
      auto& lp = groups[g].responses[i].logprobs;
      for (std::size_t t = 0; t < lp.current.size(); ++t) {
        const double s = include_score(w.weights, rc.token_features[t], temperature);
        lp.current[t] = token_logprob(s, rc.included[t] != 0);
      }
    }
  }
  return groups;
}

double summed_objective(const Instance& inst, const ToyPolicyParams& w,
                        const GrpoConfig& cfg) {
  double total = 0.0;
  for (const auto& g : rebuild_current(inst, w, cfg.temperature)) {
    total += grpo_objective(g, cfg);
  }
  return total;
}

ToyPolicyParams random_params(RngStream& rng, std::size_t dim, double radius = 0.3) {
  ToyPolicyParams p;
  for (std::size_t j = 0; j < dim; ++j) p.weights.push_back(rng.uniform(-radius, radius));
  return p;
}

TEST(GrpoGradient, OnPolicyNoKlMatchesPlainPolicyGradient) {
  // With rho = 1 and beta = 0 the objective gradient reduces to
  // sum_i A_i / (G |o_i|) sum_t grad log p_t.
  auto rng = derive_stream(71, "grad-plain");
  GrpoConfig cfg;
  cfg.kl_beta = 0.0;
  for (int it = 0; it < 100; ++it) {
    const ToyPolicyParams params = random_params(rng, 4);
    const Instance inst = make_instance(rng, params, cfg, 2, /*on_policy=*/true);
    const auto grad = grpo_gradient(params, inst.groups, inst.contexts, cfg);

    std::vector<double> expected(4, 0.0);
    for (std::size_t g = 0; g < inst.groups.size(); ++g) {
      const auto& group = inst.groups[g];
      std::vector<double> rewards;
      for (const auto& r : group.responses) rewards.push_back(r.reward);
      const auto adv = normalize_advantages(rewards);
      for (std::size_t i = 0; i < group.responses.size(); ++i) {
        const auto& rc = inst.contexts[g][i];
        const auto tokens = rc.token_features.size();
        const double scale =
            adv[i] / (static_cast<double>(group.responses.size()) * static_cast<double>(tokens));
        for (std::size_t t = 0; t < tokens; ++t) {
          const double s =
              include_score(params.weights, rc.token_features[t], cfg.temperature);
          const double d = token_logprob_dscore(s, rc.included[t] != 0);
          for (std::size_t j = 0; j < 4; ++j) {
            expected[j] += scale * d * rc.token_features[t][j] / cfg.temperature;
          }
        }
      }
    }
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(grad[j], expected[j], 1e-12);
  }
}

TEST(GrpoGradient, ZeroAdvantagesGiveZeroSurrogateGradient) {
  auto rng = derive_stream(72, "grad-zero");
  GrpoConfig cfg;
  cfg.kl_beta = 0.0;
  const ToyPolicyParams params = random_params(rng, 4);
  Instance inst = make_instance(rng, params, cfg, 1, true);
  for (auto& r : inst.groups[0].responses) r.reward = 0.7;
  const auto grad = grpo_gradient(params, inst.groups, inst.contexts, cfg);
  for (double gj : grad) EXPECT_EQ(gj, 0.0);
}

TEST(GrpoGradient, MatchesCentralDifferences) {
  auto rng = derive_stream(73, "grad-fd");
  for (int it = 0; it < 20; ++it) {
    GrpoConfig cfg;
    cfg.kl_beta = rng.bernoulli(0.3) ? 0.0 : 0.04;
    cfg.kl_form = rng.bernoulli(0.5) ? KlForm::current_over_ref : KlForm::ref_over_current;
    const ToyPolicyParams params = random_params(rng, 4);
    const Instance inst = make_instance(rng, params, cfg, 2, /*on_policy=*/false);
    const auto grad = grpo_gradient(params, inst.groups, inst.contexts, cfg);

    const double h = 1e-5;
    for (std::size_t j = 0; j < 4; ++j) {
      ToyPolicyParams up = params, down = params;
      up.weights[j] += h;
      down.weights[j] -= h;
      const double fd = (summed_objective(inst, up, cfg) - summed_objective(inst, down, cfg)) /
                        (2.0 * h);
      const double tol = 1e-4 * std::max(1.0, std::abs(fd));
      EXPECT_NEAR(grad[j], fd, tol) << "component " << j;
    }
  }
}

TEST(GrpoGradient, AscentStepImprovesObjective) {
  auto rng = derive_stream(74, "grad-ascent");
  const GrpoConfig cfg;
  const ToyPolicyParams params = random_params(rng, 4);
  const Instance inst = make_instance(rng, params, cfg, 3, false);
  const auto grad = grpo_gradient(params, inst.groups, inst.contexts, cfg);
  double norm2 = 0.0;
  for (double gj : grad) norm2 += gj * gj;
  ASSERT_GT(norm2, 1e-10);
  ToyPolicyParams stepped = params;
  for (std::size_t j = 0; j < 4; ++j) stepped.weights[j] += 1e-4 * grad[j];
  EXPECT_GT(summed_objective(inst, stepped, cfg), summed_objective(inst, params, cfg));
}

TEST(GrpoGradient, MisalignedInputsThrow) {
  auto rng = derive_stream(75, "grad-misaligned");
  const GrpoConfig cfg;
  const ToyPolicyParams params = random_params(rng, 4);
  const Instance inst = make_instance(rng, params, cfg, 2, true);

  EXPECT_THROW(grpo_gradient(params, inst.groups, {inst.contexts[0]}, cfg),
               std::invalid_argument);

  auto short_ctx = inst.contexts;
  short_ctx[0].pop_back();
  EXPECT_THROW(grpo_gradient(params, inst.groups, short_ctx, cfg), std::invalid_argument);

  auto short_tokens = inst.contexts;
  short_tokens[0][0].token_features.push_back(std::vector<double>(4, 0.0));
  short_tokens[0][0].included.push_back(0);
  EXPECT_THROW(grpo_gradient(params, inst.groups, short_tokens, cfg), std::invalid_argument);

  auto bad_dim = inst.contexts;
  bad_dim[0][0].token_features[0].pop_back();
  EXPECT_THROW(grpo_gradient(params, inst.groups, bad_dim, cfg), std::invalid_argument);
}

}  // namespace
}  // namespace refrl
