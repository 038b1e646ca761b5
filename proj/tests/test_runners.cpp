#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"

#include "bandit.hpp"
#include "runners.hpp"

using namespace seqexp;
using nlohmann::json;

TEST_CASE("simulate runner drives the cut-off rule on a bandit problem file") {
  BanditSpec spec = build_bandit(0.5, 0.2, 0.0, 0.9);
  int kstar = solve_cutoff(spec).kstar;
  std::string problem = problem_to_json(bandit_problem(spec));
  json cfg = {{"rule", "cutoff"}, {"kstar", kstar}, {"alpha", 0.5},
              {"runs", 1500},     {"cap", 1500},    {"seed", 7}};
  auto out = runners::run_simulate(problem, cfg.dump());
  auto report = json::parse(out.report_json);
  CHECK(report["status"] == "pass");
  CHECK(report["mc"]["mean_total_gap"].get<double>() <= report["mc"]["bound"].get<double>());
  CHECK(report["mc"]["truncation_rate"].get<double>() > 0.0);  // good-type runs hit the cap
  CHECK(runners::report_status_code(out.report_json) == 0);
}

TEST_CASE("simulate runner validates rule preconditions") {
  BanditSpec spec = build_bandit(0.5, 0.2, 0.0, 0.9);
  std::string problem = problem_to_json(bandit_problem(spec));
  CHECK_THROWS_AS(runners::run_simulate(problem, R"({"rule": "prop1"})"), Error);
  CHECK_THROWS_AS(runners::run_simulate(problem, R"({"rule": "nope"})"), Error);
  CHECK_THROWS_AS(runners::run_simulate(problem, R"({"rule": "cutoff"})"), Error);  // kstar missing
}

TEST_CASE("prop2 runner maps deviation failures to the hypothesis status") {
  auto low = json::parse(runners::run_prop2(R"({"delta": 0.1, "n_max": 500})").report_json);
  CHECK(low["status"] == "hypothesis_unmet");
  CHECK(runners::report_status_code(low.dump()) == 2);

  auto high = json::parse(runners::run_prop2(R"({"delta": 0.75, "n_max": 500})").report_json);
  CHECK(high["status"] == "pass");
  CHECK(high["ratio_condition"]["holds_from"] == 6);
  CHECK(high["curves"].size() == 2);
}

TEST_CASE("grid runner emits one CSV row per cell") {
  auto out = runners::run_bandit_grid(R"({"alphas": [0.5], "deltas": [0.5, 0.9], "p0as": [0.2, 0.4]})");
  int lines = 0;
  for (char ch : out.csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 5);  // header + 4 cells
  auto report = json::parse(out.report_json);
  CHECK(report["infeasible_cells"] == 2);
  CHECK(report["status"] == "pass");
}
