#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bandit.hpp"
#include "constructions.hpp"
#include "model.hpp"

using namespace seqexp;

namespace {

// The two-type safe/risky pair used throughout: safe pays 0, risky pays +1
// under the good type and -1 under the bad one.
DecisionProblem safe_risky_pair() {
  DecisionProblem p;
  p.params.labels = {"theta_0", "theta_1"};
  p.params.prior = {0.5, 0.5};
  p.actions = {"safe", "risky"};
  p.observations = {"none"};
  p.reward = {0.0, -1.0, 0.0, 1.0};
  p.discount = 0.5;
  p.kernel.states = {"s"};
  p.kernel.start = 0;
  p.kernel.n_actions = 2;
  p.kernel.n_params = 2;
  p.kernel.n_obs = 1;
  p.kernel.transition = {0, 0};
  p.kernel.emission = {1.0, 1.0};
  return p;
}

bool mentions(const std::vector<Violation>& vs, const std::string& needle) {
  for (const auto& v : vs)
    if (to_string(v).find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("revelation-family problem satisfies every invariant") {
  auto fam = build_prop1(3, 0.5);
  CHECK(validate_problem(fam.problem).empty());
  auto fam2 = build_prop1(10, 0.95);
  CHECK(validate_problem(fam2.problem).empty());
}

TEST_CASE("broken prior is reported against the prior") {
  auto fam = build_prop1(3, 0.5);
  fam.problem.params.prior = {0.3, 0.3, 0.3};
  auto vs = validate_problem(fam.problem);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].invariant == "prior-normalization");
  CHECK(vs[0].location == "parameters.prior");
}

TEST_CASE("an emission row summing to 1.1 is reported against that row") {
  auto p = safe_risky_pair();
  p.observations = {"x", "y", "z"};
  p.kernel.n_obs = 3;
  p.kernel.emission = {0.5, 0.4, 0.2,   // theta_0 row, sums to 1.1
                       0.2, 0.3, 0.5};
  auto vs = validate_problem(p);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].invariant == "emission-normalization");
  CHECK(vs[0].location == "automaton.emissions[s/theta_0]");
}

TEST_CASE("other invariant breaks are located") {
  auto p = safe_risky_pair();
  SUBCASE("discount out of range") {
    p.discount = 1.0;
    CHECK(mentions(validate_problem(p), "discount"));
  }
  SUBCASE("non-finite reward") {
    p.reward[1] = std::nan("");
    CHECK(mentions(validate_problem(p), "rewards[theta_0/risky]"));
  }
  SUBCASE("transition target out of range") {
    p.kernel.transition[0] = 5;
    CHECK(mentions(validate_problem(p), "transitions[s/safe]"));
  }
  SUBCASE("empty parameter space") {
    p.params.labels.clear();
    p.params.prior.clear();
    CHECK(mentions(validate_problem(p), "parameter-space-nonempty"));
  }
}

TEST_CASE("validation is idempotent and pure") {
  auto fam = build_prop1(4, 0.6);
  auto first = validate_problem(fam.problem);
  auto second = validate_problem(fam.problem);
  CHECK(first.size() == second.size());
  CHECK(validate_problem(fam.problem).empty());
}

TEST_CASE("expected extreme rewards") {
  SUBCASE("revelation family: best 1, worst 0 for every parameter") {
    for (int m : {2, 3, 7}) {
      auto fam = build_prop1(m, 0.75);
      auto [hi, lo] = expected_extreme_rewards(fam.problem);
      CHECK(hi == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(lo == doctest::Approx(0.0).epsilon(1e-14));
    }
  }
  SUBCASE("single parameter, single action") {
    DecisionProblem p = safe_risky_pair();
    p.params.labels = {"theta"};
    p.params.prior = {1.0};
    p.actions = {"a"};
    p.reward = {5.0};
    p.kernel.n_actions = 1;
    p.kernel.n_params = 1;
    p.kernel.transition = {0};
    p.kernel.emission = {1.0};
    auto [hi, lo] = expected_extreme_rewards(p);
    CHECK(hi == 5.0);
    CHECK(lo == 5.0);
  }
  SUBCASE("safe/risky pair: (1/2, -1/2) by enumerating the 2x2 table") {
    auto [hi, lo] = expected_extreme_rewards(safe_risky_pair());
    CHECK(hi == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(lo == doctest::Approx(-0.5).epsilon(1e-15));
  }
}

TEST_CASE("highest is never below lowest, equal only for action-constant rewards") {
  // Deterministic LCG so the sweep is reproducible.
  std::uint64_t state = 12345;
  auto next = [&]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  for (int trial = 0; trial < 200; ++trial) {
    DecisionProblem p = safe_risky_pair();
    bool constant = trial % 2 == 0;
    for (std::size_t k = 0; k < 2; ++k) {
      double base = next() * 4.0 - 2.0;
      for (std::size_t a = 0; a < 2; ++a)
        p.reward[k * 2 + a] = constant ? base : next() * 4.0 - 2.0;
    }
    auto [hi, lo] = expected_extreme_rewards(p);
    CHECK(hi >= lo);
    if (constant) CHECK(hi == lo);
  }
}

TEST_CASE("JSON round trip is lossless and stable") {
  auto fam = build_prop1(3, 0.6);
  std::string first = problem_to_json(fam.problem);
  DecisionProblem back = problem_from_json(first);
  CHECK(problem_to_json(back) == first);
  CHECK(validate_problem(back).empty());
  CHECK(back.discount == fam.problem.discount);
  CHECK(back.params.prior == fam.problem.params.prior);
  CHECK(back.kernel.emission == fam.problem.kernel.emission);

  auto spec = build_bandit(1.0, 0.2, 0.0, 0.8);
  auto bp = bandit_problem(spec);
  std::string bj = problem_to_json(bp);
  CHECK(problem_to_json(problem_from_json(bj)) == bj);
}

TEST_CASE("parser rejects malformed inputs but accepts invalid probabilities") {
  CHECK_THROWS_WITH_AS(problem_from_json("{"), doctest::Contains("not valid JSON"), Error);
  CHECK_THROWS_AS(problem_from_json("[1,2]"), Error);

  auto fam = build_prop1(2, 0.75);
  std::string good = problem_to_json(fam.problem);

  SUBCASE("missing reward entry") {
    auto mangled = good;
    auto pos = mangled.find("\"theta_1/a_0\"");
    REQUIRE(pos != std::string::npos);
    mangled.replace(pos, 13, "\"theta_1/a_x\"");
    CHECK_THROWS_AS(problem_from_json(mangled), Error);
  }
  SUBCASE("a mis-normalized prior parses and surfaces as a violation") {
    auto mangled = good;
    auto pos = mangled.find("0.5,");
    REQUIRE(pos != std::string::npos);
    mangled.replace(pos, 4, "0.4,");
    DecisionProblem p = problem_from_json(mangled);
    CHECK(mentions(validate_problem(p), "prior-normalization"));
  }
}

TEST_CASE("explicit normalization helpers") {
  Belief b{{2.0, 2.0}};
  auto n = b.normalized();
  CHECK(n.weights[0] == 0.5);
  CHECK(b.weights[0] == 2.0);
  ParameterSpace ps{{"x"}, {0.0}};
  CHECK_THROWS_AS(ps.normalized(), Error);
}
