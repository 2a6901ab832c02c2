#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace refrl {

// Linear include/exclude policy over candidate features. Each candidate is
// one decision token: include with probability sigmoid(w . phi / T). This
// stands in for the full autoregressive decoder; the optimizer only ever
// needs per-token log-probabilities and their gradients.

struct ToyPolicyParams {
  std::vector<double> weights;

  friend bool operator==(const ToyPolicyParams&, const ToyPolicyParams&) = default;
};

inline double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

// log sigmoid(s), stable for large |s|.
inline double log_sigmoid(double s) {
  return s >= 0.0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s));
}

inline double include_score(std::span<const double> weights,
                            std::span<const double> features, double temperature) {
  if (weights.size() != features.size())
    throw std::invalid_argument("include_score: feature dimension mismatch");
  if (!(temperature > 0.0))
    throw std::invalid_argument("include_score: temperature must be > 0");
  double dot = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) dot += weights[i] * features[i];
  return dot / temperature;
}

// log P(decision | score): log sigmoid(score) when included, else
// log sigmoid(-score).
inline double token_logprob(double score, bool included) {
  return log_sigmoid(included ? score : -score);
}

// d token_logprob / d score = sigmoid(-score) when included, else
// -sigmoid(score).
inline double token_logprob_dscore(double score, bool included) {
  return included ? sigmoid(-score) : -sigmoid(score);
}

}  // namespace refrl
