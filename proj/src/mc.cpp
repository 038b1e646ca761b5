#include "mc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace seqexp {

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

int Rng::categorical(std::span<const double> probs) {
  double u = uniform01();
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return static_cast<int>(i);
  }
  // u fell into the rounding slack past the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  fail(ErrorCode::invalid_argument, "categorical draw from an all-zero distribution");
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

void parallel_for_index(std::size_t count, int workers,
                        const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  std::size_t n_threads = std::min<std::size_t>(std::max(workers, 1), count);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    std::size_t lo = count * t / n_threads;
    std::size_t hi = count * (t + 1) / n_threads;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

bool absorbing_phase_holds(const DecisionProblem& p, const Belief& b, int state, int action) {
  if (p.kernel.next_state(state, action) != state) return false;
  int ref = -1;
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (b.weights[k] <= 0.0) continue;
    if (ref < 0) {
      ref = static_cast<int>(k);
      continue;
    }
    auto a_row = p.kernel.emission_row(state, ref);
    auto b_row = p.kernel.emission_row(state, static_cast<int>(k));
    for (std::size_t o = 0; o < a_row.size(); ++o)
      if (a_row[o] != b_row[o]) return false;
  }
  return experimentation_gap(p, b, action) == 0.0;
}

int MyopicRule::choose(const DecisionProblem& p, const StageContext& ctx) const {
  return myopic_best(p, ctx.belief).first;
}

bool MyopicRule::declares_absorption(const DecisionProblem& p, const StageContext& ctx,
                                     int chosen_action) const {
  int next = p.kernel.next_state(ctx.kstate, chosen_action);
  return absorbing_phase_holds(p, ctx.belief, next, chosen_action);
}

double Trajectory::total_gap() const {
  double s = 0.0;
  for (const auto& r : stages) s += r.assessment.gap;
  return s;
}

int Trajectory::count_at_least(double eps) const {
  int n = 0;
  for (const auto& r : stages)
    if (r.assessment.gap >= eps) ++n;
  return n;
}

Trajectory simulate(const DecisionProblem& p, const DecisionRule& rule, std::uint64_t seed,
                    int cap) {
  if (cap < 1) fail(ErrorCode::invalid_argument, "simulation cap must be at least 1");
  Rng rng(seed);
  Trajectory out;
  out.drawn_parameter = rng.categorical(p.params.prior);
  Belief belief{p.params.prior};
  int kstate = p.kernel.start;

  for (int n = 1; n <= cap; ++n) {
    int obs = rng.categorical(p.kernel.emission_row(kstate, out.drawn_parameter));
    belief = bayes_update(p, belief, kstate, obs);
    StageContext ctx{n, belief, kstate, obs, out.stages};
    int action = rule.choose(p, ctx);
    if (action < 0 || action >= static_cast<int>(p.n_actions()))
      fail(ErrorCode::internal, "rule '" + rule.name() + "' chose an out-of-range action");
    auto [best_action, myopic_value] = myopic_best(p, belief);
    (void)best_action;
    double chosen_value = expected_reward(p, belief, action);
    double gap = myopic_value - chosen_value;
    if (gap <= kProbTol) {
      if (gap < -kProbTol)
        fail(ErrorCode::internal, "stage gap fell below -1e-12; inconsistent inputs");
      gap = 0.0;
    }
    bool absorbed = rule.declares_absorption(p, ctx, action);
    out.stages.push_back(StageRecord{obs, action, StageAssessment{belief, myopic_value, chosen_value, gap}});
    if (absorbed) {
      int next = p.kernel.next_state(kstate, action);
      if (!absorbing_phase_holds(p, belief, next, action))
        fail(ErrorCode::internal,
             "rule '" + rule.name() + "' declared absorption but the phase is not absorbing");
      return out;
    }
    kstate = p.kernel.next_state(kstate, action);
  }
  out.truncated = true;
  return out;
}

ExperimentationReport estimate_total_experimentation(const DecisionProblem& p,
                                                     const DecisionRule& rule,
                                                     std::uint64_t runs,
                                                     std::uint64_t master_seed, int cap,
                                                     std::vector<double> eps_grid,
                                                     int workers) {
  if (runs < 2) fail(ErrorCode::invalid_argument, "estimation needs at least 2 runs");
  std::sort(eps_grid.begin(), eps_grid.end());
  eps_grid.erase(std::unique(eps_grid.begin(), eps_grid.end()), eps_grid.end());
  for (double e : eps_grid)
    if (!(e > 0.0)) fail(ErrorCode::invalid_argument, "epsilon grid entries must be positive");

  const std::size_t G = eps_grid.size();
  std::vector<double> totals(runs);
  std::vector<int> stage_counts(runs);
  std::vector<std::uint8_t> truncated(runs);
  std::vector<double> eps_counts(runs * std::max<std::size_t>(G, 1));

  parallel_for_index(runs, workers, [&](std::size_t i) {
    Trajectory t = simulate(p, rule, replication_seed(master_seed, i), cap);
    totals[i] = t.total_gap();
    stage_counts[i] = static_cast<int>(t.stages.size());
    truncated[i] = t.truncated ? 1 : 0;
    for (std::size_t g = 0; g < G; ++g)
      eps_counts[i * G + g] = static_cast<double>(t.count_at_least(eps_grid[g]));
  });

  ExperimentationReport report;
  report.runs = runs;
  report.master_seed = master_seed;
  report.bound = theorem_bound(p);
  report.mean_total_gap = pairwise_sum(totals) / static_cast<double>(runs);

  std::vector<double> sq(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    double d = totals[i] - report.mean_total_gap;
    sq[i] = d * d;
  }
  double sample_var = pairwise_sum(sq) / static_cast<double>(runs - 1);
  report.std_error = std::sqrt(sample_var / static_cast<double>(runs));

  std::vector<double> column(runs);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t i = 0; i < runs; ++i) column[i] = eps_counts[i * G + g];
    report.n_epsilon_curve.emplace_back(eps_grid[g],
                                        pairwise_sum(column) / static_cast<double>(runs));
  }

  std::size_t n_trunc = 0;
  for (auto t : truncated) n_trunc += t;
  report.truncation_rate = static_cast<double>(n_trunc) / static_cast<double>(runs);

  report.per_run.resize(runs);
  for (std::size_t i = 0; i < runs; ++i)
    report.per_run[i] = RunStat{totals[i], stage_counts[i], truncated[i] != 0};
  return report;
}

TheoremVerdict verify_theorem(const ExperimentationReport& report) {
  TheoremVerdict v;
  v.slack = report.bound - report.mean_total_gap;
  v.pass = report.mean_total_gap <= report.bound + 3.0 * report.std_error;
  v.truncation_caveat = report.truncation_rate > 0.0;
  return v;
}

}  // namespace seqexp
