#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "json.hpp"

#include "seqexp.h"

namespace {

struct Str {
  char* p = nullptr;
  ~Str() { seqx_string_free(p); }
  std::string s() const { return p ? std::string(p) : std::string(); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(seqx_version()) == "0.1.0");
  CHECK(std::string(seqx_status_name(SEQX_OK)) == "ok");
  CHECK(std::string(seqx_status_name(SEQX_ERR_INFEASIBLE)) == "infeasible");
  CHECK(std::string(seqx_status_name(999)) == "unknown");
}

TEST_CASE("problem handles round trip through JSON") {
  Str exported, err;
  REQUIRE(seqx_prop1_problem_json(3, 0.6, &exported.p, &err.p) == SEQX_OK);

  seqx_problem* handle = nullptr;
  REQUIRE(seqx_problem_from_json(exported.p, &handle, &err.p) == SEQX_OK);
  Str back;
  REQUIRE(seqx_problem_to_json(handle, &back.p, &err.p) == SEQX_OK);
  CHECK(back.s() == exported.s());

  Str violations;
  REQUIRE(seqx_problem_validate(handle, &violations.p, &err.p) == SEQX_OK);
  CHECK(nlohmann::json::parse(violations.s()).empty());

  double bound = 0.0;
  REQUIRE(seqx_problem_theorem_bound(handle, &bound, &err.p) == SEQX_OK);
  CHECK(bound == doctest::Approx(1.5).epsilon(1e-12));
  seqx_problem_free(handle);
}

TEST_CASE("parse errors carry a message and status") {
  seqx_problem* handle = nullptr;
  {
    Str err;
    CHECK(seqx_problem_from_json("{nope", &handle, &err.p) == SEQX_ERR_PARSE);
    CHECK(err.s().find("not valid JSON") != std::string::npos);
    CHECK(handle == nullptr);
  }
  {
    Str err;
    CHECK(seqx_problem_from_json(nullptr, &handle, &err.p) == SEQX_ERR_INVALID_ARGUMENT);
  }
}

TEST_CASE("a mis-normalized prior surfaces as a violation, not an error") {
  Str exported, err;
  REQUIRE(seqx_prop1_problem_json(2, 0.75, &exported.p, &err.p) == SEQX_OK);
  auto j = nlohmann::json::parse(exported.s());
  j["parameters"]["prior"] = {0.5, 0.4};
  seqx_problem* handle = nullptr;
  REQUIRE(seqx_problem_from_json(j.dump().c_str(), &handle, &err.p) == SEQX_OK);
  Str violations;
  REQUIRE(seqx_problem_validate(handle, &violations.p, &err.p) == SEQX_OK);
  auto vs = nlohmann::json::parse(violations.s());
  REQUIRE(vs.size() == 1);
  CHECK(vs[0]["invariant"] == "prior-normalization");
  seqx_problem_free(handle);
}

TEST_CASE("prop1 runs are byte-identical across worker counts and repeats") {
  auto run = [](int workers) {
    nlohmann::json cfg = {{"m", 3}, {"delta", 0.6}, {"runs", 8000}, {"seed", 7}, {"workers", workers}};
    Str report, csv, err;
    REQUIRE(seqx_run_prop1(cfg.dump().c_str(), &report.p, &csv.p, &err.p) == SEQX_OK);
    return std::pair<std::string, std::string>(report.s(), csv.s());
  };
  auto [r1, c1] = run(1);
  auto [r4, c4] = run(4);
  auto [r4b, c4b] = run(4);
  CHECK(r1 == r4);
  CHECK(c1 == c4);
  CHECK(r4 == r4b);
  CHECK(c4 == c4b);

  int code = -1;
  Str err;
  REQUIRE(seqx_report_status_code(r1.c_str(), &code, &err.p) == SEQX_OK);
  CHECK(code == 0);
}

TEST_CASE("configuration errors are invalid-argument, infeasibility is its own status") {
  {
    Str report, csv, err;
    CHECK(seqx_run_prop1("{\"delta\": 0.6}", &report.p, &csv.p, &err.p) ==
          SEQX_ERR_INVALID_ARGUMENT);
    CHECK(err.s().find("'m'") != std::string::npos);
  }
  {
    Str report, csv, err;
    nlohmann::json bad = {{"m", 2}, {"delta", 0.4}};
    CHECK(seqx_run_prop1(bad.dump().c_str(), &report.p, &csv.p, &err.p) ==
          SEQX_ERR_INVALID_ARGUMENT);
  }
  {
    Str report, csv, err;
    nlohmann::json infeasible = {{"alpha", 1.0}, {"p0a", 0.3}, {"delta", 0.8}};
    CHECK(seqx_run_bandit(infeasible.dump().c_str(), &report.p, &csv.p, &err.p) ==
          SEQX_ERR_INFEASIBLE);
    CHECK(err.s().find("p0_b") != std::string::npos);
  }
}

TEST_CASE("verify flags a fabricated report") {
  nlohmann::json fake = {
      {"mc",
       {{"runs", 100}, {"mean_total_gap", 3.0}, {"std_error", 0.01}, {"bound", 1.5},
        {"truncation_rate", 0.0}, {"master_seed", 1}}}};
  Str verdict, err;
  REQUIRE(seqx_verify_report(fake.dump().c_str(), &verdict.p, &err.p) == SEQX_OK);
  auto j = nlohmann::json::parse(verdict.s());
  CHECK(j["verdict"]["pass"] == false);
  CHECK(j["status"] == "check_failed");
  int code = -1;
  REQUIRE(seqx_report_status_code(verdict.s().c_str(), &code, &err.p) == SEQX_OK);
  CHECK(code == 3);
}

TEST_CASE("exported problems feed back into simulate") {
  Str exported, err;
  REQUIRE(seqx_prop1_problem_json(3, 0.6, &exported.p, &err.p) == SEQX_OK);
  nlohmann::json cfg = {{"rule", "prop1"}, {"runs", 2000}, {"seed", 11}};
  Str report, csv;
  REQUIRE(seqx_run_simulate(exported.p, cfg.dump().c_str(), &report.p, &csv.p, &err.p) == SEQX_OK);
  auto j = nlohmann::json::parse(report.s());
  CHECK(j["status"] == "pass");
  double mean = j["mc"]["mean_total_gap"].get<double>();
  double se = j["mc"]["std_error"].get<double>();
  CHECK(std::abs(mean - 1.0) <= 3.0 * se);
  CHECK(csv.s().rfind("run_id,total_gap,stages,truncated\n", 0) == 0);
}

TEST_CASE("bandit grid reports infeasible cells instead of dropping them") {
  nlohmann::json cfg = {{"alphas", {0.5, 2.0}}, {"deltas", {0.8}}, {"p0as", {0.2}}};
  Str report, csv, err;
  REQUIRE(seqx_run_bandit_grid(cfg.dump().c_str(), &report.p, &csv.p, &err.p) == SEQX_OK);
  auto j = nlohmann::json::parse(report.s());
  CHECK(j["infeasible_cells"] == 1);
  CHECK(j["cells"].size() == 2);
  bool saw_infeasible = false;
  for (const auto& cell : j["cells"])
    if (cell["feasible"] == false) {
      saw_infeasible = true;
      CHECK(cell["reason"].get<std::string>().find("p0_b") != std::string::npos);
    }
  CHECK(saw_infeasible);
}
