#include "seqexp.h"

#include <cstdlib>
#include <cstring>
#include <new>

#include "json.hpp"

#include "constructions.hpp"
#include "model.hpp"
#include "runners.hpp"

struct seqx_problem {
  seqexp::DecisionProblem value;
};

namespace {

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_err(char** err, const std::string& message) {
  if (err) *err = dup_string(message);
}

int code_of(const seqexp::Error& e) {
  switch (e.code()) {
    case seqexp::ErrorCode::invalid_argument: return SEQX_ERR_INVALID_ARGUMENT;
    case seqexp::ErrorCode::parse_error: return SEQX_ERR_PARSE;
    case seqexp::ErrorCode::infeasible: return SEQX_ERR_INFEASIBLE;
    case seqexp::ErrorCode::impossible_observation: return SEQX_ERR_INTERNAL;
    case seqexp::ErrorCode::internal: return SEQX_ERR_INTERNAL;
  }
  return SEQX_ERR_INTERNAL;
}

template <typename Fn>
int guarded(char** err, Fn&& fn) {
  if (err) *err = nullptr;
  try {
    return fn();
  } catch (const seqexp::Error& e) {
    set_err(err, e.what());
    return code_of(e);
  } catch (const std::bad_alloc&) {
    set_err(err, "out of memory");
    return SEQX_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_err(err, e.what());
    return SEQX_ERR_INTERNAL;
  } catch (...) {
    set_err(err, "unknown error");
    return SEQX_ERR_INTERNAL;
  }
}

int require_arg(const void* p, const char* name, char** err) {
  if (p) return SEQX_OK;
  set_err(err, std::string("null argument: ") + name);
  return SEQX_ERR_INVALID_ARGUMENT;
}

int run_with_csv(seqexp::runners::RunOutput (*runner)(const std::string&),
                 const char* config_json, char** out_report, char** out_csv, char** err) {
  return guarded(err, [&] {
    auto result = runner(config_json ? config_json : "");
    if (out_report) *out_report = dup_string(result.report_json);
    if (out_csv) *out_csv = dup_string(result.csv);
    return SEQX_OK;
  });
}

}  // namespace

extern "C" {

const char* seqx_version(void) { return "0.1.0"; }

const char* seqx_status_name(int status) {
  switch (status) {
    case SEQX_OK: return "ok";
    case SEQX_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SEQX_ERR_PARSE: return "parse_error";
    case SEQX_ERR_INFEASIBLE: return "infeasible";
    case SEQX_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void seqx_string_free(char* s) { std::free(s); }

int seqx_problem_from_json(const char* json, seqx_problem** out, char** err) {
  if (int rc = require_arg(json, "json", err)) return rc;
  if (int rc = require_arg(out, "out", err)) return rc;
  return guarded(err, [&] {
    auto* handle = new seqx_problem{seqexp::problem_from_json(json)};
    *out = handle;
    return SEQX_OK;
  });
}

int seqx_problem_to_json(const seqx_problem* p, char** out_json, char** err) {
  if (int rc = require_arg(p, "problem", err)) return rc;
  if (int rc = require_arg(out_json, "out_json", err)) return rc;
  return guarded(err, [&] {
    *out_json = dup_string(seqexp::problem_to_json(p->value));
    return SEQX_OK;
  });
}

void seqx_problem_free(seqx_problem* p) { delete p; }

int seqx_problem_validate(const seqx_problem* p, char** out_violations_json, char** err) {
  if (int rc = require_arg(p, "problem", err)) return rc;
  if (int rc = require_arg(out_violations_json, "out_violations_json", err)) return rc;
  return guarded(err, [&] {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& v : seqexp::validate_problem(p->value)) {
      arr.push_back({{"invariant", v.invariant}, {"location", v.location}, {"detail", v.detail}});
    }
    *out_violations_json = dup_string(arr.dump(2));
    return SEQX_OK;
  });
}

int seqx_problem_theorem_bound(const seqx_problem* p, double* out, char** err) {
  if (int rc = require_arg(p, "problem", err)) return rc;
  if (int rc = require_arg(out, "out", err)) return rc;
  return guarded(err, [&] {
    seqexp::require_valid(p->value);
    *out = seqexp::theorem_bound(p->value);
    return SEQX_OK;
  });
}

int seqx_run_prop1(const char* config_json, char** out_report, char** out_csv, char** err) {
  return run_with_csv(seqexp::runners::run_prop1, config_json, out_report, out_csv, err);
}

int seqx_run_prop2(const char* config_json, char** out_report, char** err) {
  return run_with_csv(seqexp::runners::run_prop2, config_json, out_report, nullptr, err);
}

int seqx_run_bandit(const char* config_json, char** out_report, char** out_csv, char** err) {
  return run_with_csv(seqexp::runners::run_bandit, config_json, out_report, out_csv, err);
}

int seqx_run_bandit_grid(const char* config_json, char** out_report, char** out_csv, char** err) {
  return run_with_csv(seqexp::runners::run_bandit_grid, config_json, out_report, out_csv, err);
}

int seqx_run_simulate(const char* problem_json, const char* config_json, char** out_report,
                      char** out_csv, char** err) {
  if (int rc = require_arg(problem_json, "problem_json", err)) return rc;
  return guarded(err, [&] {
    auto result = seqexp::runners::run_simulate(problem_json, config_json ? config_json : "");
    if (out_report) *out_report = dup_string(result.report_json);
    if (out_csv) *out_csv = dup_string(result.csv);
    return SEQX_OK;
  });
}

int seqx_verify_report(const char* report_json, char** out_verdict, char** err) {
  if (int rc = require_arg(report_json, "report_json", err)) return rc;
  return guarded(err, [&] {
    auto result = seqexp::runners::run_verify(report_json);
    if (out_verdict) *out_verdict = dup_string(result.report_json);
    return SEQX_OK;
  });
}

int seqx_report_status_code(const char* report_json, int* out_code, char** err) {
  if (int rc = require_arg(report_json, "report_json", err)) return rc;
  if (int rc = require_arg(out_code, "out_code", err)) return rc;
  return guarded(err, [&] {
    *out_code = seqexp::runners::report_status_code(report_json);
    return SEQX_OK;
  });
}

int seqx_prop1_problem_json(int m, double delta, char** out_json, char** err) {
  if (int rc = require_arg(out_json, "out_json", err)) return rc;
  return guarded(err, [&] {
    *out_json = dup_string(seqexp::problem_to_json(seqexp::build_prop1(m, delta).problem));
    return SEQX_OK;
  });
}

}  // extern "C"
