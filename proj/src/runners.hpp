#pragma once

// Report orchestration: each runner takes a JSON configuration (flags from
// the CLI or a config file, already merged), performs one full analysis, and
// returns a machine-readable report plus CSV row material. Reports carry a
// status of "pass", "hypothesis_unmet" or "check_failed"; configuration
// problems raise errors instead.

#include <string>

namespace seqexp::runners {

struct RunOutput {
  std::string report_json;
  std::string csv;  // empty when the run produces no CSV
};

RunOutput run_prop1(const std::string& config_json);
RunOutput run_prop2(const std::string& config_json);
RunOutput run_bandit(const std::string& config_json);
RunOutput run_bandit_grid(const std::string& config_json);
RunOutput run_simulate(const std::string& problem_json, const std::string& config_json);
RunOutput run_verify(const std::string& report_json);

/// Exit-status convention encoded in a report: 0 pass, 2 hypothesis unmet,
/// 3 check failed.
int report_status_code(const std::string& report_json);

}  // namespace seqexp::runners
