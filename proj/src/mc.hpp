#pragma once

// Seeded Monte Carlo simulation of decision rules. Replications are
// independent; their seeds derive deterministically from a master seed, and
// aggregation runs in fixed index order so reports are bit-identical for a
// given master seed regardless of the worker count.

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "belief.hpp"

namespace seqexp {

// --- deterministic seeding ---------------------------------------------------

/// Seed of replication `index` under `master_seed`: the (index+1)-th output
/// of the SplitMix64 stream started at master_seed. Fixed so that reports
/// are portable across machines.
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index);

/// mt19937_64 wrapper drawing through fixed, implementation-independent
/// recipes (53-bit uniforms, inverse-CDF categorical draws).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  int categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

/// Sum in fixed pairwise order; deterministic for a given index order.
double pairwise_sum(std::span<const double> xs);

/// Runs body(i) for i in [0, count) across up to `workers` threads. Any
/// exception from a body is rethrown on the calling thread after join.
void parallel_for_index(std::size_t count, int workers,
                        const std::function<void(std::size_t)>& body);

// --- decision rules ------------------------------------------------------------

struct StageRecord {
  int observation = -1;
  int action = -1;
  StageAssessment assessment;
};

/// View of the state a rule may condition on: the stage index (1-based), the
/// posterior after this stage's observation, the automaton state that
/// emitted it, the observation itself, and the full record of completed
/// stages.
struct StageContext {
  int stage;
  const Belief& belief;
  int kstate;
  int observation;
  std::span<const StageRecord> history;
};

class DecisionRule {
 public:
  virtual ~DecisionRule() = default;
  virtual std::string name() const = 0;

  /// Must be deterministic: identical contexts yield identical actions.
  virtual int choose(const DecisionProblem& p, const StageContext& ctx) const = 0;

  /// A rule may declare that from this stage on its action is fixed and the
  /// kernel uninformative; the engine verifies the claim before closing the
  /// trajectory. Default: never.
  virtual bool declares_absorption(const DecisionProblem& p, const StageContext& ctx,
                                   int chosen_action) const {
    (void)p;
    (void)ctx;
    (void)chosen_action;
    return false;
  }
};

/// True when playing `action` forever from automaton state `state` keeps the
/// belief constant (state self-loops and its emissions coincide on the
/// belief support) and the stage gap is exactly zero.
bool absorbing_phase_holds(const DecisionProblem& p, const Belief& b, int state, int action);

/// Plays the myopically best action; declares absorption whenever doing so
/// is verifiably safe.
class MyopicRule : public DecisionRule {
 public:
  std::string name() const override { return "myopic"; }
  int choose(const DecisionProblem& p, const StageContext& ctx) const override;
  bool declares_absorption(const DecisionProblem& p, const StageContext& ctx,
                           int chosen_action) const override;
};

// --- simulation -----------------------------------------------------------------

struct Trajectory {
  std::vector<StageRecord> stages;
  int drawn_parameter = -1;
  bool truncated = false;  // hard cap reached before a declared absorption

  double total_gap() const;
  int count_at_least(double eps) const;  // N(eps) over recorded stages
};

/// Draws a parameter from the prior, then alternates observation draws and
/// rule decisions up to `cap` stages or a verified absorption.
Trajectory simulate(const DecisionProblem& p, const DecisionRule& rule, std::uint64_t seed,
                    int cap);

// --- estimation -----------------------------------------------------------------

struct RunStat {
  double total_gap = 0.0;
  int stages = 0;
  bool truncated = false;
};

struct ExperimentationReport {
  std::uint64_t runs = 0;
  double mean_total_gap = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(runs)
  std::vector<std::pair<double, double>> n_epsilon_curve;  // (eps, mean N(eps)), eps ascending
  double bound = 0.0;      // (E[highest] - E[lowest]) * discount/(1-discount)
  double truncation_rate = 0.0;
  std::uint64_t master_seed = 0;
  std::vector<RunStat> per_run;  // row material for the runs CSV
};

ExperimentationReport estimate_total_experimentation(const DecisionProblem& p,
                                                     const DecisionRule& rule,
                                                     std::uint64_t runs,
                                                     std::uint64_t master_seed, int cap,
                                                     std::vector<double> eps_grid,
                                                     int workers = 1);

struct TheoremVerdict {
  bool pass = false;
  double slack = 0.0;  // bound - mean_total_gap
  bool truncation_caveat = false;
};

/// PASS iff mean_total_gap <= bound + 3 * std_error; a positive truncation
/// rate is flagged as a caveat, never silently ignored.
TheoremVerdict verify_theorem(const ExperimentationReport& report);

}  // namespace seqexp
