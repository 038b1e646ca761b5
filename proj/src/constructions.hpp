#pragma once

// The two families that exercise the experimentation bound from both sides:
//
//  * the m-parameter revelation family: play a baseline action and the true
//    parameter is revealed with a fixed per-stage probability c chosen so
//    that waiting is exactly optimal; total experimentation has a closed
//    form, which the Monte Carlo engine can be checked against;
//
//  * the Gaussian slow-experimentation construction: a decreasing target
//    sequence (eps_n) and the noise precisions (rho_n) that realize it,
//    verified analytically (recursion residuals, deviation inequalities and
//    the n * eps_n^alpha growth curves). Nothing here is simulated.

#include <memory>
#include <span>
#include <vector>

#include "mc.hpp"

namespace seqexp {

// --- revelation family --------------------------------------------------------

struct Prop1Family {
  int m = 0;
  double delta = 0.0;
  double c = 0.0;  // per-stage revelation probability (1-delta)/(delta*(m-1))
  DecisionProblem problem;
  std::shared_ptr<const DecisionRule> rule;  // wait for revelation, then match
};

/// Requires m >= 2 and m > 1/delta (otherwise c would reach 1).
Prop1Family build_prop1(int m, double delta);

/// Normalized value c*delta/(1-(1-c)*delta) of the wait-then-match rule;
/// checked against its closed form 1/m to 1e-12.
double prop1_value(const Prop1Family& fam);

/// Exact total experimentation ((m-1)/m) * delta/(1-delta).
double prop1_exact_total(const Prop1Family& fam);

// --- Gaussian construction ------------------------------------------------------

/// Probability that a centered normal with precision rho lands within
/// distance 1 of its mean: 2*Phi(sqrt(rho)) - 1. Strictly increasing, 0 at
/// 0+, 1 at infinity.
double gaussian_ubar(double rho);

/// Decreasing positive sequence following the 1/(n ln^2 n) profile for
/// n >= 3; the first two entries extend the n=3 value upward geometrically
/// by `head_ratio`, and the whole sequence is scaled so its infinite sum is
/// `target_sum` (which must lie in (1/2, 1)).
std::vector<double> default_epsilon_sequence(int n_max, double target_sum,
                                             double head_ratio = 1.25);

struct RatioConditionReport {
  double min_ratio = 0.0;  // min over n of eps_n / eps_{n-1}
  int min_index = 0;       // 1-based n attaining it
  bool holds_everywhere = false;  // every ratio > 2/3
  int holds_from = 0;      // smallest n0 with ratio > 2/3 for all n >= n0
};

struct GaussianConstruction {
  int n_max = 0;
  double target_sum = 1.0;  // upper bracket for the infinite sum of eps
  std::vector<double> eps;
  std::vector<double> partial_sum;     // S_n = eps_1 + ... + eps_n
  std::vector<double> rho;             // per-stage precisions
  std::vector<double> cumulative_rho;  // R_n with ubar(R_n) = S_n
  double max_recursion_residual = 0.0;
  RatioConditionReport ratio_check;
};

/// Inverts gaussian_ubar at each cumulative target by bisection to residual
/// below 1e-12. Fails with `infeasible` when the partial sums reach 1.
GaussianConstruction solve_rho_sequence(std::span<const double> eps,
                                        double target_sum_upper = 1.0);

struct DeviationCheck {
  double continuation_low = 0.0;   // sound lower bound on the continuation value
  double continuation_high = 0.0;  // matching upper bound
  double stopping = 0.0;           // value of deviating at stage k
  bool ok = false;                 // continuation_low > stopping
};

/// Compares the discounted continuation value of following the prescribed
/// sequence past stage k against stopping at stage k. The tail beyond n_max
/// is bracketed between the last partial sum and target_sum, so `ok` is a
/// sound claim.
DeviationCheck prop2_deviation_check(const GaussianConstruction& g, int k, double delta);

/// n * eps_n^alpha for n = 1..n_max; diverges as n grows for every
/// alpha < 1, although the polylog factor makes the prefix non-monotone for
/// alpha near 1.
std::vector<double> n_epsilon_alpha_curve(const GaussianConstruction& g, double alpha);

/// Value of the analytic profile curve n * (scale/(n ln^2 n))^alpha at
/// arbitrary n, used to examine growth far beyond any computed prefix.
double profile_curve_value(double scale, double n, double alpha);

}  // namespace seqexp
