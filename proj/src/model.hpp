#pragma once

// Finite discounted Bayesian decision problems: a parameter space with a
// prior, finite action and observation sets, a reward table, and a
// finite-state observation automaton whose emissions may depend on the true
// parameter. History-dependent signalling is carried by the automaton (its
// state is a function of the action history), which is enough to encode
// revelation-style and bandit-style kernels with two or three states.
//
// All values are immutable after construction and safe to share across
// threads.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"

namespace seqexp {

/// Tolerance for probability normalization checks. Inputs are never
/// renormalized silently; use the explicit normalized() helpers.
inline constexpr double kProbTol = 1e-12;

struct ParameterSpace {
  std::vector<std::string> labels;
  std::vector<double> prior;

  std::size_t size() const { return labels.size(); }
  ParameterSpace normalized() const;
};

/// Probability vector over the parameter labels of some problem.
struct Belief {
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  Belief normalized() const;

  static Belief uniform(std::size_t n);
  static Belief point_mass(std::size_t index, std::size_t n);
};

/// Action-driven state machine; each state emits an observation whose
/// distribution depends on the true parameter.
struct ObservationAutomaton {
  std::vector<std::string> states;
  int start = 0;
  int n_actions = 0;
  int n_params = 0;
  int n_obs = 0;
  std::vector<int> transition;    // [state][action]
  std::vector<double> emission;   // [state][param][obs]

  int num_states() const { return static_cast<int>(states.size()); }

  int next_state(int state, int action) const {
    return transition[static_cast<std::size_t>(state) * n_actions + action];
  }

  double emit(int state, int param, int obs) const {
    return emission[(static_cast<std::size_t>(state) * n_params + param) * n_obs + obs];
  }

  std::span<const double> emission_row(int state, int param) const {
    return {emission.data() + (static_cast<std::size_t>(state) * n_params + param) * n_obs,
            static_cast<std::size_t>(n_obs)};
  }
};

struct DecisionProblem {
  ParameterSpace params;
  std::vector<std::string> actions;
  std::vector<std::string> observations;
  std::vector<double> reward;  // [param][action]
  ObservationAutomaton kernel;
  double discount = 0.0;

  std::size_t n_params() const { return params.size(); }
  std::size_t n_actions() const { return actions.size(); }
  std::size_t n_obs() const { return observations.size(); }

  double reward_at(int param, int action) const {
    return reward[static_cast<std::size_t>(param) * actions.size() + action];
  }

  int param_index(const std::string& label) const;
  int action_index(const std::string& label) const;
  int obs_index(const std::string& label) const;
};

struct Violation {
  std::string invariant;
  std::string location;
  std::string detail;
};

std::string to_string(const Violation& v);

/// Collects every invariant violation; an empty list means the problem is
/// well formed. Pure and idempotent: violations are data, not failures.
std::vector<Violation> validate_problem(const DecisionProblem& p);

/// Throws Error(invalid_argument) listing the violations, if any.
void require_valid(const DecisionProblem& p);

/// Prior-weighted expectations of the per-parameter best and worst rewards,
/// returned as (highest, lowest).
std::pair<double, double> expected_extreme_rewards(const DecisionProblem& p);

/// JSON schema version 1 (see README). Round-trips are lossless for
/// double-precision values.
std::string problem_to_json(const DecisionProblem& p, int indent = 2);
DecisionProblem problem_from_json(const std::string& text);

}  // namespace seqexp
