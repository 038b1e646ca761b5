#include "constructions.hpp"

#include <cmath>
#include <sstream>

namespace seqexp {

namespace {

/// Waits on the baseline action until a revelation symbol arrives, then
/// plays the matching action forever. Observation index i >= 1 reveals
/// parameter i-1, whose matching action has the same index i.
class RevelationRule : public DecisionRule {
 public:
  std::string name() const override { return "prop1"; }

  int choose(const DecisionProblem& p, const StageContext& ctx) const override {
    (void)p;
    if (ctx.observation >= 1) return ctx.observation;
    for (const auto& rec : ctx.history)
      if (rec.observation >= 1) return rec.observation;
    return 0;
  }

  bool declares_absorption(const DecisionProblem& p, const StageContext& ctx,
                           int chosen_action) const override {
    (void)p;
    (void)ctx;
    return chosen_action != 0;
  }
};

}  // namespace

Prop1Family build_prop1(int m, double delta) {
  if (m < 2) fail(ErrorCode::invalid_argument, "revelation family needs m >= 2");
  if (!(delta > 0.0 && delta < 1.0))
    fail(ErrorCode::invalid_argument, "revelation family needs delta in (0,1)");
  if (!(static_cast<double>(m) * delta > 1.0)) {
    std::ostringstream os;
    os << "m must exceed 1/delta so that the revelation probability "
          "c = (1-delta)/(delta*(m-1)) stays below 1; got m = "
       << m << ", 1/delta = " << (1.0 / delta);
    fail(ErrorCode::invalid_argument, os.str());
  }

  Prop1Family fam;
  fam.m = m;
  fam.delta = delta;
  fam.c = (1.0 - delta) / (delta * (m - 1));

  DecisionProblem& p = fam.problem;
  for (int k = 1; k <= m; ++k) p.params.labels.push_back("theta_" + std::to_string(k));
  p.params.prior.assign(m, 1.0 / m);
  for (int a = 0; a <= m; ++a) p.actions.push_back("a_" + std::to_string(a));
  p.observations.push_back("none");
  for (int k = 1; k <= m; ++k) p.observations.push_back("reveal_theta_" + std::to_string(k));
  p.discount = delta;

  const int A = m + 1;
  const int O = m + 1;
  p.reward.assign(static_cast<std::size_t>(m) * A, 0.0);
  for (int k = 0; k < m; ++k) p.reward[static_cast<std::size_t>(k) * A + (k + 1)] = 1.0;

  auto& krn = p.kernel;
  krn.states = {"fresh", "waiting", "deviated"};
  krn.start = 0;
  krn.n_actions = A;
  krn.n_params = m;
  krn.n_obs = O;
  // The baseline action keeps the revelation channel open; anything else
  // shuts it permanently. The fresh state covers the uninformative first
  // observation.
  krn.transition.assign(3 * static_cast<std::size_t>(A), 2);
  krn.transition[0 * A + 0] = 1;
  krn.transition[1 * A + 0] = 1;
  krn.emission.assign(3 * static_cast<std::size_t>(m) * O, 0.0);
  auto at = [&](int s, int k, int o) -> double& {
    return krn.emission[(static_cast<std::size_t>(s) * m + k) * O + o];
  };
  for (int k = 0; k < m; ++k) {
    at(0, k, 0) = 1.0;
    at(1, k, 0) = 1.0 - fam.c;
    at(1, k, k + 1) = fam.c;
    at(2, k, 0) = 1.0;
  }

  fam.rule = std::make_shared<RevelationRule>();
  return fam;
}

double prop1_value(const Prop1Family& fam) {
  double value = fam.c * fam.delta / (1.0 - (1.0 - fam.c) * fam.delta);
  double expected = 1.0 / static_cast<double>(fam.m);
  if (std::abs(value - expected) > 1e-12)
    fail(ErrorCode::internal, "revelation-family value drifted from its closed form 1/m");
  return value;
}

double prop1_exact_total(const Prop1Family& fam) {
  double m = static_cast<double>(fam.m);
  return ((m - 1.0) / m) * fam.delta / (1.0 - fam.delta);
}

// --- Gaussian construction ------------------------------------------------------

double gaussian_ubar(double rho) {
  if (!(rho > 0.0)) fail(ErrorCode::invalid_argument, "precision must be positive");
  return std::erf(std::sqrt(0.5 * rho));
}

namespace {

double profile(double n) {
  double l = std::log(n);
  return 1.0 / (n * l * l);
}

}  // namespace

double profile_curve_value(double scale, double n, double alpha) {
  return n * std::pow(scale * profile(n), alpha);
}

std::vector<double> default_epsilon_sequence(int n_max, double target_sum, double head_ratio) {
  if (n_max < 3) fail(ErrorCode::invalid_argument, "sequence length must be at least 3");
  if (!(target_sum > 0.5 && target_sum < 1.0))
    fail(ErrorCode::invalid_argument, "target sum must lie strictly inside (1/2, 1)");
  if (!(head_ratio > 1.0 && head_ratio < 10.0))
    fail(ErrorCode::invalid_argument, "head ratio must lie in (1, 10)");

  std::vector<double> w(static_cast<std::size_t>(n_max));
  double w3 = profile(3.0);
  w[0] = head_ratio * head_ratio * w3;
  w[1] = head_ratio * w3;
  for (int n = 3; n <= n_max; ++n) w[static_cast<std::size_t>(n - 1)] = profile(n);

  // Infinite mass of the profile: exact prefix plus a midpoint-rule estimate
  // of the tail integral of 1/(x ln^2 x), which is 1/ln(n_max + 1/2).
  double mass = 0.0;
  for (double x : w) mass += x;
  mass += 1.0 / std::log(static_cast<double>(n_max) + 0.5);

  double scale = target_sum / mass;
  for (double& x : w) x *= scale;
  return w;
}

GaussianConstruction solve_rho_sequence(std::span<const double> eps, double target_sum_upper) {
  if (eps.empty()) fail(ErrorCode::invalid_argument, "epsilon sequence is empty");
  GaussianConstruction g;
  g.n_max = static_cast<int>(eps.size());
  g.eps.assign(eps.begin(), eps.end());

  double running = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0))
      fail(ErrorCode::invalid_argument, "epsilon sequence must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1]))
      fail(ErrorCode::invalid_argument, "epsilon sequence must be strictly decreasing");
    running += eps[i];
    if (running >= 1.0)
      fail(ErrorCode::infeasible,
           "cumulative epsilon reaches 1, outside the attainable range of the myopic value");
    g.partial_sum.push_back(running);
  }
  g.target_sum = std::max(target_sum_upper, g.partial_sum.back());

  // Invert ubar at each cumulative target by bisection.
  double r_prev = 0.0;
  for (double target : g.partial_sum) {
    double lo = r_prev;
    double hi = r_prev + 1.0;
    while (gaussian_ubar(hi) < target) hi = r_prev + 2.0 * (hi - r_prev);
    for (int it = 0; it < 200 && (hi - lo) > 1e-16 * std::max(1.0, hi); ++it) {
      double mid = 0.5 * (lo + hi);
      if (gaussian_ubar(mid) < target)
        lo = mid;
      else
        hi = mid;
    }
    double r = 0.5 * (lo + hi);
    double residual = std::abs(gaussian_ubar(r) - target);
    if (residual > 1e-12)
      fail(ErrorCode::internal, "precision recursion failed to reach its residual target");
    g.max_recursion_residual = std::max(g.max_recursion_residual, residual);
    g.rho.push_back(r - r_prev);
    g.cumulative_rho.push_back(r);
    r_prev = r;
  }

  // Slow-decay diagnostic: consecutive ratios against 2/3.
  auto& rc = g.ratio_check;
  rc.min_ratio = 1.0;
  rc.min_index = 1;
  rc.holds_everywhere = true;
  rc.holds_from = 1;
  for (std::size_t n = 1; n < g.eps.size(); ++n) {
    double ratio = g.eps[n] / g.eps[n - 1];
    if (ratio < rc.min_ratio) {
      rc.min_ratio = ratio;
      rc.min_index = static_cast<int>(n + 1);
    }
    if (ratio <= 2.0 / 3.0) {
      rc.holds_everywhere = false;
      rc.holds_from = static_cast<int>(n + 2);
    }
  }
  return g;
}

DeviationCheck prop2_deviation_check(const GaussianConstruction& g, int k, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    fail(ErrorCode::invalid_argument, "deviation check needs delta in (0,1)");
  if (k < 1 || k > g.n_max - 1)
    fail(ErrorCode::invalid_argument, "deviation stage must satisfy 1 <= k <= n_max - 1");

  auto partial = [&](int n) { return n <= 0 ? 0.0 : g.partial_sum[static_cast<std::size_t>(n - 1)]; };

  // (1-delta) * sum_{n>=k} delta^(n-k) S_{n-1}; exact through n = n_max, the
  // geometric tail bracketed by [S_{n_max}, target_sum].
  double head = 0.0;
  double weight = 1.0 - delta;
  for (int n = k; n <= g.n_max; ++n) {
    head += weight * partial(n - 1);
    weight *= delta;
    if (weight < 1e-300) {
      weight = 0.0;
      break;
    }
  }
  double tail_weight = weight / (1.0 - delta);  // delta^(n_max+1-k) when not underflowed

  DeviationCheck out;
  out.stopping = partial(k);
  out.continuation_low = head + tail_weight * g.partial_sum.back();
  out.continuation_high = head + tail_weight * g.target_sum;
  out.ok = out.continuation_low > out.stopping;
  return out;
}

std::vector<double> n_epsilon_alpha_curve(const GaussianConstruction& g, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorCode::invalid_argument, "curve exponent must lie in (0,1)");
  std::vector<double> out(g.eps.size());
  for (std::size_t n = 0; n < g.eps.size(); ++n)
    out[n] = static_cast<double>(n + 1) * std::pow(g.eps[n], alpha);
  return out;
}

}  // namespace seqexp
