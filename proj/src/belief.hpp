#pragma once

// Bayesian updating and the per-stage experimentation measures built on it:
// the myopically optimal value, the value of the action actually chosen, and
// their gap. All functions are pure.

#include <utility>
#include <vector>

#include "model.hpp"

namespace seqexp {

struct StageAssessment {
  Belief belief;
  double myopic_value = 0.0;
  double chosen_value = 0.0;
  double gap = 0.0;  // myopic_value - chosen_value, clamped to 0 within kProbTol
};

/// Mixture probability of each observation symbol at automaton state
/// `kstate` under belief `b`.
std::vector<double> observation_mixture(const DecisionProblem& p, const Belief& b, int kstate);

/// Posterior after observing `obs` emitted from `kstate`; renormalized.
/// Throws Error(impossible_observation) when the observation has zero
/// mixture probability under `b`.
Belief bayes_update(const DecisionProblem& p, const Belief& b, int kstate, int obs);

/// Belief-weighted expected reward of one action.
double expected_reward(const DecisionProblem& p, const Belief& b, int action);

/// Best one-stage action and its value. Ties resolve to the earliest action
/// in the problem's action list, so runs are deterministic.
std::pair<int, double> myopic_best(const DecisionProblem& p, const Belief& b);

/// Myopic value minus the expected reward of `action`; never negative.
/// Values within kProbTol of zero are clamped to exactly 0 so that
/// threshold counts are stable.
double experimentation_gap(const DecisionProblem& p, const Belief& b, int action);

/// (E[highest reward] - E[lowest reward]) * discount / (1 - discount).
double theorem_bound(const DecisionProblem& p);

}  // namespace seqexp
