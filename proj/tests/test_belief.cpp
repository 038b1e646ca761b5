#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bandit.hpp"
#include "belief.hpp"
#include "constructions.hpp"

using namespace seqexp;

namespace {

Belief make_belief(std::vector<double> w) { return Belief{std::move(w)}; }

}  // namespace

TEST_CASE("point mass is a fixed point of the update") {
  auto fam = build_prop1(3, 0.5);
  Belief point = Belief::point_mass(0, 3);
  // State "waiting" (1) emits either the null symbol or reveal_theta_1 under
  // theta_1; both are consistent with the point mass.
  for (int obs : {0, 1}) {
    Belief post = bayes_update(fam.problem, point, 1, obs);
    CHECK(post.weights[0] == 1.0);
    CHECK(post.weights[1] == 0.0);
  }
}

TEST_CASE("uninformative emission leaves the uniform belief unchanged") {
  auto fam = build_prop1(4, 0.6);
  Belief uniform = Belief::uniform(4);
  Belief post = bayes_update(fam.problem, uniform, 0, 0);  // fresh state emits only "none"
  for (double w : post.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("posterior odds equal the likelihood ratio; log-odds shift by the outcome LLR") {
  auto spec = build_bandit(1.0, 0.2, 0.0, 0.8);
  auto p = bandit_problem(spec);
  Belief even = make_belief({0.5, 0.5});
  // pulled state is index 1; outcomes a,b,c are observations 1,2,3.
  struct Case { int obs; double llr; };
  for (auto [obs, llr] : {Case{1, spec.alpha}, Case{2, 2.0 * spec.alpha}, Case{3, -spec.alpha}}) {
    Belief post = bayes_update(p, even, 1, obs);
    double odds = post.weights[1] / post.weights[0];
    double want = spec.p1[static_cast<std::size_t>(obs - 1)] / spec.p0[static_cast<std::size_t>(obs - 1)];
    CHECK(odds == doctest::Approx(want).epsilon(1e-12));
    CHECK(std::log(odds) == doctest::Approx(llr).epsilon(1e-12));
  }
}

TEST_CASE("log-odds additivity from arbitrary two-parameter beliefs") {
  auto spec = build_bandit(0.5, 0.3, 0.0, 0.9);
  auto p = bandit_problem(spec);
  for (double w1 : {0.1, 0.37, 0.5, 0.93}) {
    Belief prior = make_belief({1.0 - w1, w1});
    double prior_lo = std::log(w1 / (1.0 - w1));
    for (int obs = 1; obs <= 3; ++obs) {
      Belief post = bayes_update(p, prior, 1, obs);
      double post_lo = std::log(post.weights[1] / post.weights[0]);
      double llr = std::log(p.kernel.emit(1, 1, obs) / p.kernel.emit(1, 0, obs));
      CHECK(post_lo == doctest::Approx(prior_lo + llr).epsilon(1e-10));
    }
  }
}

TEST_CASE("zero-probability observation raises an impossible-observation error") {
  auto spec = build_bandit(1.0, 0.2, 0.0, 0.8);
  auto p = bandit_problem(spec);
  Belief even = make_belief({0.5, 0.5});
  // "none" never comes out of the pulled state.
  CHECK_THROWS_WITH_AS(bayes_update(p, even, 1, 0),
                       doctest::Contains("'none' has zero probability at automaton state 'pulled'"),
                       Error);
}

TEST_CASE("martingale property by exact enumeration") {
  auto check_problem = [](const DecisionProblem& p, const Belief& b) {
    for (int s = 0; s < p.kernel.num_states(); ++s) {
      auto mix = observation_mixture(p, b, s);
      std::vector<double> avg(b.size(), 0.0);
      for (std::size_t o = 0; o < mix.size(); ++o) {
        if (mix[o] <= 0.0) continue;
        Belief post = bayes_update(p, b, s, static_cast<int>(o));
        for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += mix[o] * post.weights[k];
      }
      for (std::size_t k = 0; k < avg.size(); ++k)
        CHECK(avg[k] == doctest::Approx(b.weights[k]).epsilon(1e-12));
    }
  };
  auto fam = build_prop1(3, 0.5);
  check_problem(fam.problem, Belief::uniform(3));
  check_problem(fam.problem, make_belief({0.2, 0.5, 0.3}));
  auto spec = build_bandit(1.0, 0.2, 0.0, 0.8);
  check_problem(bandit_problem(spec), make_belief({0.4, 0.6}));
}

TEST_CASE("martingale property over randomly generated problems") {
  std::uint64_t state = 777;
  auto next = [&]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  for (int trial = 0; trial < 50; ++trial) {
    DecisionProblem p;
    p.params.labels = {"t0", "t1", "t2"};
    p.actions = {"a", "b"};
    p.observations = {"x", "y", "z"};
    p.discount = 0.5;
    p.reward.assign(6, 0.0);
    p.kernel.states = {"s0", "s1"};
    p.kernel.n_actions = 2;
    p.kernel.n_params = 3;
    p.kernel.n_obs = 3;
    p.kernel.transition = {0, 1, 1, 0};
    p.kernel.emission.resize(2 * 3 * 3);
    for (int row = 0; row < 6; ++row) {
      double u = 0.1 + next(), v = 0.1 + next(), w = 0.1 + next();
      double s = u + v + w;
      p.kernel.emission[row * 3 + 0] = u / s;
      p.kernel.emission[row * 3 + 1] = v / s;
      p.kernel.emission[row * 3 + 2] = w / s;
    }
    double b0 = 0.05 + next(), b1 = 0.05 + next(), b2 = 0.05 + next();
    double bs = b0 + b1 + b2;
    Belief b = make_belief({b0 / bs, b1 / bs, b2 / bs});
    for (int s = 0; s < 2; ++s) {
      auto mix = observation_mixture(p, b, s);
      for (std::size_t k = 0; k < 3; ++k) {
        double avg = 0.0;
        for (std::size_t o = 0; o < 3; ++o)
          avg += mix[o] * bayes_update(p, b, s, static_cast<int>(o)).weights[k];
        CHECK(avg == doctest::Approx(b.weights[k]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("myopic best on the revelation family") {
  auto fam = build_prop1(5, 0.75);
  SUBCASE("uniform prior: all matching actions tie at 1/m, first wins") {
    auto [a, v] = myopic_best(fam.problem, Belief::uniform(5));
    CHECK(a == 1);  // a_0 yields 0, a_1..a_5 yield 1/5 each
    CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
  }
  SUBCASE("point mass: the matching action, value 1") {
    for (std::size_t k = 0; k < 5; ++k) {
      auto [a, v] = myopic_best(fam.problem, Belief::point_mass(k, 5));
      CHECK(a == static_cast<int>(k) + 1);
      CHECK(v == 1.0);
    }
  }
}

TEST_CASE("myopic value of a constant reward table is that constant") {
  DecisionProblem p;
  p.params.labels = {"x", "y"};
  p.params.prior = {0.25, 0.75};
  p.actions = {"a", "b", "c"};
  p.observations = {"none"};
  p.reward.assign(6, 2.5);
  p.discount = 0.3;
  p.kernel.states = {"s"};
  p.kernel.n_actions = 3;
  p.kernel.n_params = 2;
  p.kernel.n_obs = 1;
  p.kernel.transition = {0, 0, 0};
  p.kernel.emission = {1.0, 1.0};
  auto [a, v] = myopic_best(p, make_belief({0.25, 0.75}));
  CHECK(a == 0);
  CHECK(v == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("experimentation gap") {
  auto fam = build_prop1(4, 0.8);
  Belief uniform = Belief::uniform(4);
  SUBCASE("zero at the myopic action, nonnegative everywhere") {
    auto [best, v] = myopic_best(fam.problem, uniform);
    (void)v;
    CHECK(experimentation_gap(fam.problem, uniform, best) == 0.0);
    for (std::size_t a = 0; a < fam.problem.n_actions(); ++a)
      CHECK(experimentation_gap(fam.problem, uniform, static_cast<int>(a)) >= 0.0);
  }
  SUBCASE("baseline action is 1/m-suboptimal under the uniform prior") {
    CHECK(experimentation_gap(fam.problem, uniform, 0) == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("risky pull below the even prior costs 1 - 2 pi") {
    auto spec = build_bandit(1.0, 0.2, 0.0, 0.8);
    auto p = bandit_problem(spec);
    for (double pi : {0.1, 0.3, 0.49}) {
      Belief b = make_belief({1.0 - pi, pi});
      CHECK(experimentation_gap(p, b, 1) == doctest::Approx(1.0 - 2.0 * pi).epsilon(1e-12));
    }
  }
}

TEST_CASE("theorem bound") {
  auto spec = build_bandit(1.0, 0.2, 0.0, 0.9);
  auto p = bandit_problem(spec);  // spread = 1
  SUBCASE("direct evaluations") {
    p.discount = 0.9;
    CHECK(theorem_bound(p) == doctest::Approx(9.0).epsilon(1e-12));
    p.discount = 0.0;
    CHECK(theorem_bound(p) == 0.0);
    auto fam = build_prop1(3, 2.0 / 3.0);
    CHECK(theorem_bound(fam.problem) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("monotone in the discount") {
    double last = -1.0;
    for (double d : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
      p.discount = d;
      double bound = theorem_bound(p);
      CHECK(bound >= last);
      last = bound;
    }
  }
}
