#include "bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace seqexp {

namespace {

constexpr double kLn2 = 0.6931471805599453;

void check_component(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0)) {
    std::ostringstream os;
    os.precision(12);
    os << "parameterization infeasible: " << name << " = " << value
       << " falls outside (0,1)";
    fail(ErrorCode::infeasible, os.str());
  }
}

}  // namespace

BanditSpec build_bandit(double alpha, double p0a, double rb, double delta) {
  if (!(alpha > 0.0)) fail(ErrorCode::invalid_argument, "alpha must be positive");
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::invalid_argument, "delta must lie in (0,1)");
  check_component(p0a, "p0_a");

  const double ea = std::exp(alpha);
  const double e2a = std::exp(2.0 * alpha);
  const double ema = std::exp(-alpha);

  // Both triples sum to 1 with p1_o = exp(llr_o) p0_o; two linear equations
  // in (p0_b, p0_c).
  double p0b = (1.0 - ema - p0a * (ea - ema)) / (e2a - ema);
  double p0c = 1.0 - p0a - p0b;
  check_component(p0b, "p0_b");
  check_component(p0c, "p0_c");

  BanditSpec spec;
  spec.alpha = alpha;
  spec.delta = delta;
  spec.p0 = {p0a, p0b, p0c};
  spec.p1 = {ea * p0a, e2a * p0b, ema * p0c};
  check_component(spec.p1[0], "p1_a");
  check_component(spec.p1[1], "p1_b");
  check_component(spec.p1[2], "p1_c");

  // Expected rewards +1 under the good type and -1 under the bad type pin
  // (r_a, r_c) once r_b is fixed.
  double det = spec.p1[0] * spec.p0[2] - spec.p1[2] * spec.p0[0];
  double rhs1 = 1.0 - rb * spec.p1[1];
  double rhs0 = -1.0 - rb * spec.p0[1];
  double ra = (rhs1 * spec.p0[2] - spec.p1[2] * rhs0) / det;
  double rc = (spec.p1[0] * rhs0 - rhs1 * spec.p0[0]) / det;
  spec.rewards = {ra, rb, rc};

  // The construction enforces these identities; re-check before returning.
  for (int i = 0; i < 3; ++i) {
    double want = (i == 0 ? alpha : i == 1 ? 2.0 * alpha : -alpha);
    if (std::abs(std::log(spec.p1[i] / spec.p0[i]) - want) > 1e-10)
      fail(ErrorCode::internal, "solved probabilities violate a log-likelihood-ratio identity");
  }
  double sum0 = spec.p0[0] + spec.p0[1] + spec.p0[2];
  double sum1 = spec.p1[0] + spec.p1[1] + spec.p1[2];
  if (std::abs(sum0 - 1.0) > kProbTol || std::abs(sum1 - 1.0) > kProbTol)
    fail(ErrorCode::internal, "solved probability triples do not sum to 1");
  double e1 = spec.rewards[0] * spec.p1[0] + spec.rewards[1] * spec.p1[1] + spec.rewards[2] * spec.p1[2];
  double e0 = spec.rewards[0] * spec.p0[0] + spec.rewards[1] * spec.p0[1] + spec.rewards[2] * spec.p0[2];
  if (std::abs(e1 - 1.0) > 1e-10 || std::abs(e0 + 1.0) > 1e-10)
    fail(ErrorCode::internal, "solved rewards violate an expected-reward constraint");
  return spec;
}

double llr_of_outcome(const BanditSpec& spec, Outcome o) {
  switch (o) {
    case Outcome::a: return spec.alpha;
    case Outcome::b: return 2.0 * spec.alpha;
    case Outcome::c: return -spec.alpha;
  }
  fail(ErrorCode::invalid_argument, "unknown outcome");
}

int llr_step(Outcome o) {
  switch (o) {
    case Outcome::a: return 1;
    case Outcome::b: return 2;
    case Outcome::c: return -1;
  }
  fail(ErrorCode::invalid_argument, "unknown outcome");
}

double belief_at_z(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double belief_at_level(long k, double alpha) {
  return belief_at_z(-static_cast<double>(k) * alpha);
}

double eps_of_level(long k, double alpha) { return 0.5 - belief_at_level(k, alpha); }

double cutoff_bound(const BanditSpec& spec) {
  return 4.0 * (1.0 + 2.0 * kLn2 / spec.alpha +
                2.0 * (1.0 - spec.p0[0]) / (spec.p0[0] * (1.0 - spec.delta)));
}

CutoffResult solve_cutoff(const BanditSpec& spec, int k_max_override) {
  const int k_max = k_max_override > 0
                        ? k_max_override
                        : 2 * static_cast<int>(std::ceil(cutoff_bound(spec))) + 8;
  const int n = 2 * k_max + 1;
  const double delta = spec.delta;

  std::vector<double> pi(n), flow(n);
  std::array<std::vector<double>, 3> q;  // mixture step probabilities per lattice point
  for (auto& v : q) v.resize(n);
  for (int idx = 0; idx < n; ++idx) {
    double z = static_cast<double>(idx - k_max) * spec.alpha;
    pi[idx] = belief_at_z(z);
    flow[idx] = 2.0 * pi[idx] - 1.0;
    for (int o = 0; o < 3; ++o)
      q[o][idx] = pi[idx] * spec.p1[o] + (1.0 - pi[idx]) * spec.p0[o];
  }

  // Out-of-range values: 0 below (stop), pull-forever value above. The
  // posterior is a martingale under the mixture, so pulling forever from
  // log-odds z is worth exactly 2 pi(z) - 1.
  auto boundary = [&](int j) {
    return j < -k_max ? 0.0 : 2.0 * belief_at_z(static_cast<double>(j) * spec.alpha) - 1.0;
  };

  CutoffResult res;
  res.k_max = k_max;
  res.lattice_lo = -k_max;
  res.lattice_hi = k_max;

  std::vector<double> v(n, 0.0), nv(n);
  const int max_iters = 2000000;
  double residual = 0.0;
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    residual = 0.0;
    for (int idx = 0; idx < n; ++idx) {
      int j = idx - k_max;
      auto val = [&](int jj) {
        return (jj < -k_max || jj > k_max) ? boundary(jj) : v[static_cast<std::size_t>(jj + k_max)];
      };
      double cont = (1.0 - delta) * flow[idx] +
                    delta * (q[0][idx] * val(j + 1) + q[1][idx] * val(j + 2) + q[2][idx] * val(j - 1));
      double next = std::max(0.0, cont);
      residual = std::max(residual, std::abs(next - v[idx]));
      nv[idx] = next;
    }
    v.swap(nv);
    res.residual_history.push_back(residual);
    if (residual < 1e-12) break;
  }
  if (residual >= 1e-12)
    fail(ErrorCode::internal, "cut-off value iteration failed to converge");
  res.iterations = iter + 1;
  res.residual = residual;
  res.values = std::move(v);

  int kstar = -1;
  for (int k = 0; k <= k_max; ++k) {
    if (res.value_at(-k) == 0.0) {
      kstar = k;
      break;
    }
  }
  if (kstar < 0 || kstar >= k_max - 2)
    fail(ErrorCode::invalid_argument,
         "cut-off landed within two lattice steps of the truncation edge; raise k_max");
  res.kstar = kstar;

  // The stop region must be a down-set: zero exactly at and below -kstar,
  // positive everywhere above.
  for (int j = -k_max; j <= k_max; ++j) {
    bool stopped = res.value_at(j) == 0.0;
    if (j <= -kstar && !stopped)
      fail(ErrorCode::internal, "stop region is not a down-set on the lattice");
    if (j > -kstar && stopped)
      fail(ErrorCode::internal, "stop region is not a down-set on the lattice");
  }
  return res;
}

// --- expected visits ---------------------------------------------------------

VisitReport expected_visits(const BanditSpec& spec, int kstar, std::uint64_t mc_runs,
                            std::uint64_t master_seed, int cap, int workers) {
  if (kstar < 1) fail(ErrorCode::invalid_argument, "visit counts need kstar >= 1");
  if (mc_runs < 2) fail(ErrorCode::invalid_argument, "visit estimation needs at least 2 runs");

  VisitReport report;
  report.visit_floor = spec.p0[0] / (1.0 - spec.p0[0]);
  report.mc_runs = mc_runs;

  // Transient levels j in (-kstar, k_top]; below is the cut-off, above is
  // truncated and treated as absorbing, which can only lose visits (a
  // lower-bound method; the loss is of order exp(-k_top*alpha)).
  const int k_top = std::max(kstar + 8, static_cast<int>(std::ceil(40.0 / spec.alpha)) + 4);
  const int n = kstar + k_top;  // j = -kstar+1 .. k_top
  auto idx = [&](int j) { return j + kstar - 1; };

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  for (int j = -kstar + 1; j <= k_top; ++j) {
    const int steps[3] = {1, 2, -1};
    for (int o = 0; o < 3; ++o) {
      int to = j + steps[o];
      if (to <= -kstar || to > k_top) continue;
      A(idx(to), idx(j)) -= spec.p0[o];
    }
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(idx(0)) = 1.0;
  Eigen::VectorXd visits = A.partialPivLu().solve(b);

  report.linear.resize(static_cast<std::size_t>(kstar));
  for (int k = 0; k < kstar; ++k) report.linear[static_cast<std::size_t>(k)] = visits(idx(-k));

  // Monte Carlo counterpart under the bad type.
  const std::size_t levels = static_cast<std::size_t>(kstar);
  std::vector<double> counts(mc_runs * levels, 0.0);
  std::vector<std::uint8_t> absorbed(mc_runs, 0);
  parallel_for_index(mc_runs, workers, [&](std::size_t i) {
    Rng rng(replication_seed(master_seed, i));
    long j = 0;
    for (int stage = 0; stage < cap; ++stage) {
      if (j <= -static_cast<long>(kstar)) {
        absorbed[i] = 1;
        break;
      }
      if (j <= 0) counts[i * levels + static_cast<std::size_t>(-j)] += 1.0;
      int o = rng.categorical(spec.p0);
      j += llr_step(static_cast<Outcome>(o));
    }
  });

  std::size_t not_absorbed = 0;
  for (auto a : absorbed) not_absorbed += a ? 0 : 1;
  report.non_absorbed_fraction = static_cast<double>(not_absorbed) / static_cast<double>(mc_runs);

  report.mc_mean.resize(static_cast<std::size_t>(kstar));
  report.mc_std_error.resize(static_cast<std::size_t>(kstar));
  std::vector<double> column(mc_runs);
  report.floor_ok = true;
  report.agree_3se = true;
  for (int k = 0; k < kstar; ++k) {
    for (std::size_t i = 0; i < mc_runs; ++i) column[i] = counts[i * levels + static_cast<std::size_t>(k)];
    double mean = pairwise_sum(column) / static_cast<double>(mc_runs);
    std::vector<double> sq(mc_runs);
    for (std::size_t i = 0; i < mc_runs; ++i) {
      double d = column[i] - mean;
      sq[i] = d * d;
    }
    double se = std::sqrt(pairwise_sum(sq) / static_cast<double>(mc_runs - 1) /
                          static_cast<double>(mc_runs));
    report.mc_mean[static_cast<std::size_t>(k)] = mean;
    report.mc_std_error[static_cast<std::size_t>(k)] = se;

    if (report.linear[static_cast<std::size_t>(k)] < report.visit_floor - 1e-9)
      report.floor_ok = false;
    double diff = std::abs(report.linear[static_cast<std::size_t>(k)] - mean);
    double ratio = se > 0.0 ? diff / se : (diff < 1e-9 ? 0.0 : 1e300);
    report.max_se_ratio = std::max(report.max_se_ratio, ratio);
    if (ratio > 3.0) report.agree_3se = false;
  }
  return report;
}

double path_identity_check(const BanditSpec& spec, int kstar, std::uint64_t seed, int cap) {
  if (kstar < 0) fail(ErrorCode::invalid_argument, "kstar must be nonnegative");
  Rng rng(seed);
  const std::array<double, 2> prior = {0.5, 0.5};
  int theta = rng.categorical(prior);
  const auto& probs = theta == 1 ? spec.p1 : spec.p0;

  std::vector<double> visits(static_cast<std::size_t>(std::max(kstar, 1)), 0.0);
  double lhs = 0.0;
  long j = 0;
  for (int stage = 0; stage < cap; ++stage) {
    if (j <= -static_cast<long>(kstar)) break;  // safe forever; later gaps are zero
    if (j <= 0) {
      long k = -j;
      lhs += eps_of_level(k, spec.alpha);
      visits[static_cast<std::size_t>(k)] += 1.0;
    }
    j += llr_step(static_cast<Outcome>(rng.categorical(probs)));
  }
  double rhs = 0.0;
  for (int k = 0; k < kstar; ++k)
    rhs += eps_of_level(k, spec.alpha) * visits[static_cast<std::size_t>(k)];
  return std::abs(lhs - rhs);
}

// --- equivalent finite problem -----------------------------------------------

DecisionProblem bandit_problem(const BanditSpec& spec) {
  DecisionProblem p;
  p.params.labels = {"theta_0", "theta_1"};
  p.params.prior = {0.5, 0.5};
  p.actions = {"safe", "risky"};
  p.observations = {"none", "a", "b", "c"};
  // Outcome values enter only through their expectations under each type.
  p.reward = {0.0, -1.0, 0.0, 1.0};
  p.discount = spec.delta;

  auto& k = p.kernel;
  k.states = {"quiet", "pulled"};
  k.start = 0;
  k.n_actions = 2;
  k.n_params = 2;
  k.n_obs = 4;
  k.transition = {0, 1, 0, 1};
  k.emission.assign(2 * 2 * 4, 0.0);
  auto at = [&](int s, int q, int o) -> double& {
    return k.emission[(static_cast<std::size_t>(s) * 2 + q) * 4 + o];
  };
  at(0, 0, 0) = 1.0;
  at(0, 1, 0) = 1.0;
  for (int o = 0; o < 3; ++o) {
    at(1, 0, o + 1) = spec.p0[static_cast<std::size_t>(o)];
    at(1, 1, o + 1) = spec.p1[static_cast<std::size_t>(o)];
  }
  return p;
}

namespace {

class CutoffRule : public DecisionRule {
 public:
  CutoffRule(double alpha, int kstar) : alpha_(alpha), kstar_(kstar) {}

  std::string name() const override { return "cutoff"; }

  int choose(const DecisionProblem& p, const StageContext& ctx) const override {
    (void)p;
    return level_of(ctx.belief) <= -static_cast<long>(kstar_) ? 0 : 1;
  }

  bool declares_absorption(const DecisionProblem& p, const StageContext& ctx,
                           int chosen_action) const override {
    (void)p;
    (void)ctx;
    return chosen_action == 0;  // safe is permanent
  }

 private:
  long level_of(const Belief& b) const {
    // Log-odds of the good type land on the lattice up to rounding noise far
    // below half a step. A weight can underflow to exactly zero once the
    // walk has drifted a few hundred steps; treat that as certainty.
    double w0 = b.weights[0];
    double w1 = b.weights[1];
    if (w1 <= 0.0) return std::numeric_limits<long>::min() / 4;
    if (w0 <= 0.0) return std::numeric_limits<long>::max() / 4;
    // log(w1) - log(w0), not log(w1/w0): the ratio overflows once a weight
    // goes denormal, a few hundred lattice steps out.
    return std::lround((std::log(w1) - std::log(w0)) / alpha_);
  }

  double alpha_;
  int kstar_;
};

}  // namespace

std::shared_ptr<const DecisionRule> cutoff_rule(const BanditSpec& spec, int kstar) {
  if (kstar < 0) fail(ErrorCode::invalid_argument, "kstar must be nonnegative");
  return std::make_shared<CutoffRule>(spec.alpha, kstar);
}

TheoremConsistency theorem_consistency(const BanditSpec& spec, int kstar, std::uint64_t runs,
                                       std::uint64_t master_seed, int cap, int workers) {
  if (runs < 2) fail(ErrorCode::invalid_argument, "consistency check needs at least 2 runs");
  TheoremConsistency out;
  for (int k = 0; k < kstar; ++k) out.eps_level_sum += eps_of_level(k, spec.alpha);
  out.bound3_rhs = 4.0 * (1.0 - spec.p0[0]) / (spec.p0[0] * (1.0 - spec.delta));
  out.bound3_ok = out.eps_level_sum <= out.bound3_rhs + 1e-12;

  DecisionProblem problem = bandit_problem(spec);
  auto rule = cutoff_rule(spec, kstar);
  const int risky = 1;

  std::vector<double> full(runs), half(runs);
  std::vector<int> stage_counts(runs);
  std::vector<std::uint8_t> truncated(runs);
  parallel_for_index(runs, workers, [&](std::size_t i) {
    Trajectory t = simulate(problem, *rule, replication_seed(master_seed, i), cap);
    double g2 = 0.0, g4 = 0.0;
    for (const auto& rec : t.stages) {
      g2 += rec.assessment.gap;
      if (rec.action == risky) g4 += std::max(0.0, 0.5 - rec.assessment.belief.weights[1]);
    }
    full[i] = g2;
    half[i] = g4;
    stage_counts[i] = static_cast<int>(t.stages.size());
    truncated[i] = t.truncated ? 1 : 0;
  });

  auto summarize = [&](const std::vector<double>& xs, double& mean, double& se) {
    mean = pairwise_sum(xs) / static_cast<double>(runs);
    std::vector<double> sq(runs);
    for (std::size_t i = 0; i < runs; ++i) {
      double d = xs[i] - mean;
      sq[i] = d * d;
    }
    se = std::sqrt(pairwise_sum(sq) / static_cast<double>(runs - 1) / static_cast<double>(runs));
  };

  auto& mc = out.mc_generic;
  mc.runs = runs;
  mc.master_seed = master_seed;
  mc.bound = theorem_bound(problem);
  summarize(full, mc.mean_total_gap, mc.std_error);
  std::size_t n_trunc = 0;
  for (auto t : truncated) n_trunc += t;
  mc.truncation_rate = static_cast<double>(n_trunc) / static_cast<double>(runs);
  mc.per_run.resize(runs);
  for (std::size_t i = 0; i < runs; ++i)
    mc.per_run[i] = RunStat{full[i], stage_counts[i], truncated[i] != 0};

  summarize(half, out.mean_total_half_gap, out.half_gap_std_error);
  out.paper_chain_rhs = 2.0 * spec.delta / (1.0 - spec.delta);

  out.theorem_ok = verify_theorem(mc).pass;
  out.paper_chain_ok =
      out.mean_total_half_gap <= out.paper_chain_rhs + 3.0 * out.half_gap_std_error;
  out.pass = out.bound3_ok && out.theorem_ok && out.paper_chain_ok;
  return out;
}

}  // namespace seqexp
