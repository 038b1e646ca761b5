#include "belief.hpp"

#include <cmath>

namespace seqexp {

std::vector<double> observation_mixture(const DecisionProblem& p, const Belief& b, int kstate) {
  std::vector<double> mix(p.n_obs(), 0.0);
  for (std::size_t k = 0; k < p.n_params(); ++k) {
    double w = b.weights[k];
    if (w == 0.0) continue;
    auto row = p.kernel.emission_row(kstate, static_cast<int>(k));
    for (std::size_t o = 0; o < mix.size(); ++o) mix[o] += w * row[o];
  }
  return mix;
}

Belief bayes_update(const DecisionProblem& p, const Belief& b, int kstate, int obs) {
  Belief post;
  post.weights.resize(b.size());
  double mass = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    double w = b.weights[k] * p.kernel.emit(kstate, static_cast<int>(k), obs);
    post.weights[k] = w;
    mass += w;
  }
  if (mass <= 0.0) {
    fail(ErrorCode::impossible_observation,
         "observation '" + p.observations[static_cast<std::size_t>(obs)] +
             "' has zero probability at automaton state '" +
             p.kernel.states[static_cast<std::size_t>(kstate)] + "'");
  }
  for (double& w : post.weights) w /= mass;
  return post;
}

double expected_reward(const DecisionProblem& p, const Belief& b, int action) {
  double v = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k)
    v += b.weights[k] * p.reward_at(static_cast<int>(k), action);
  return v;
}

std::pair<int, double> myopic_best(const DecisionProblem& p, const Belief& b) {
  int best = 0;
  double best_value = expected_reward(p, b, 0);
  for (std::size_t a = 1; a < p.n_actions(); ++a) {
    double v = expected_reward(p, b, static_cast<int>(a));
    if (v > best_value) {
      best = static_cast<int>(a);
      best_value = v;
    }
  }
  return {best, best_value};
}

double experimentation_gap(const DecisionProblem& p, const Belief& b, int action) {
  double gap = myopic_best(p, b).second - expected_reward(p, b, action);
  if (gap <= kProbTol) {
    if (gap < -kProbTol)
      fail(ErrorCode::internal, "experimentation gap fell below -1e-12; inputs are inconsistent");
    return 0.0;
  }
  return gap;
}

double theorem_bound(const DecisionProblem& p) {
  auto [hi, lo] = expected_extreme_rewards(p);
  return (hi - lo) * p.discount / (1.0 - p.discount);
}

}  // namespace seqexp
