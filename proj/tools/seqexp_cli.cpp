// Command-line front end. Flags are merged over an optional JSON config file
// (command line wins), handed to the shared library as one configuration
// object, and the returned report/CSV strings are written verbatim, so two
// runs with the same effective configuration produce byte-identical files.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "seqexp.h"

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitHypothesis = 2;
constexpr int kExitCheckFailed = 3;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { seqx_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

[[noreturn]] void die(const std::string& message, int code = kExitUsage) {
  std::cerr << "seqexp: " << message << "\n";
  std::exit(code);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die("cannot read file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) die("cannot write file '" + path + "'");
  out << content;
}

int check_api(int status, const OwnedString& err) {
  if (status == SEQX_OK) return 0;
  std::string detail = err.ptr ? err.str() : std::string(seqx_status_name(status));
  int exit_code = status == SEQX_ERR_INTERNAL ? kExitCheckFailed : kExitUsage;
  die(detail, exit_code);
}

// Tracks flag values plus whether the user set them, so a config file can
// fill in anything left untouched.
class ConfigBuilder {
 public:
  explicit ConfigBuilder(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", config_path_, "JSON file supplying any flag; command line wins");
  }

  void add_int(const char* flag, const char* key, const char* help) {
    auto slot = std::make_shared<std::int64_t>();
    ints_.push_back({cmd_->add_option(flag, *slot, help), key, slot});
  }

  void add_double(const char* flag, const char* key, const char* help) {
    auto slot = std::make_shared<double>();
    doubles_.push_back({cmd_->add_option(flag, *slot, help), key, slot});
  }

  void add_double_list(const char* flag, const char* key, const char* help) {
    auto slot = std::make_shared<std::vector<double>>();
    lists_.push_back({cmd_->add_option(flag, *slot, help)->delimiter(','), key, slot});
  }

  void add_string(const char* flag, const char* key, const char* help) {
    auto slot = std::make_shared<std::string>();
    strings_.push_back({cmd_->add_option(flag, *slot, help), key, slot});
  }

  ordered_json merged() const {
    ordered_json cfg = ordered_json::object();
    if (!config_path_.empty()) {
      try {
        cfg = ordered_json::parse(read_file(config_path_));
      } catch (const std::exception& e) {
        die("config file '" + config_path_ + "' is not valid JSON: " + e.what());
      }
      if (!cfg.is_object()) die("config file '" + config_path_ + "' must hold a JSON object");
    }
    for (const auto& [opt, key, slot] : ints_)
      if (opt->count() > 0) cfg[key] = *slot;
    for (const auto& [opt, key, slot] : doubles_)
      if (opt->count() > 0) cfg[key] = *slot;
    for (const auto& [opt, key, slot] : lists_)
      if (opt->count() > 0) cfg[key] = *slot;
    for (const auto& [opt, key, slot] : strings_)
      if (opt->count() > 0) cfg[key] = *slot;
    return cfg;
  }

 private:
  template <typename T>
  struct Entry {
    CLI::Option* opt;
    std::string key;
    std::shared_ptr<T> slot;
  };

  CLI::App* cmd_;
  std::string config_path_;
  std::vector<Entry<std::int64_t>> ints_;
  std::vector<Entry<double>> doubles_;
  std::vector<Entry<std::vector<double>>> lists_;
  std::vector<Entry<std::string>> strings_;
};

int exit_code_for(const std::string& report) {
  OwnedString err;
  int code = 0;
  if (seqx_report_status_code(report.c_str(), &code, &err.ptr) != SEQX_OK)
    die("malformed report: " + err.str(), kExitCheckFailed);
  switch (code) {
    case 0: return kExitOk;
    case 2: return kExitHypothesis;
    default: return kExitCheckFailed;
  }
}

void print_checks(const std::string& report_text) {
  auto report = ordered_json::parse(report_text);
  if (auto it = report.find("checks"); it != report.end()) {
    for (const auto& c : *it) {
      std::cout << "  [" << (c.at("pass").get<bool>() ? "PASS" : "FAIL") << "] "
                << c.at("name").get<std::string>() << ": "
                << c.at("statement").get<std::string>() << "\n";
    }
  }
  std::cout << "status: " << report.at("status").get<std::string>() << "\n";
}

void emit(const std::string& out_base, const std::string& report, const std::string& csv,
          const char* csv_suffix = ".runs.csv") {
  write_file(out_base + ".report.json", report);
  std::cout << "wrote " << out_base << ".report.json\n";
  if (!csv.empty()) {
    write_file(out_base + csv_suffix, csv);
    std::cout << "wrote " << out_base << csv_suffix << "\n";
  }
  print_checks(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seqexp — experimentation gaps in discounted Bayesian sequential decision problems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", seqx_version());

  // prop1: the m-parameter revelation family.
  auto* prop1 = app.add_subcommand(
      "prop1", "analyze the revelation family: exact totals vs seeded Monte Carlo");
  ConfigBuilder prop1_cfg(prop1);
  prop1_cfg.add_int("--m", "m", "number of parameters (m >= 2, m > 1/delta)");
  prop1_cfg.add_double("--delta", "delta", "discount factor in (0,1)");
  prop1_cfg.add_int("--runs", "runs", "Monte Carlo replications (default 100000)");
  prop1_cfg.add_int("--seed", "seed", "master seed (default 7)");
  prop1_cfg.add_int("--cap", "cap", "stage cap per trajectory (default 100000)");
  prop1_cfg.add_double_list("--eps-grid", "eps_grid", "thresholds for N(eps) (default 0.01,0.1,0.5)");
  prop1_cfg.add_int("--workers", "workers", "worker threads (default 4; results identical)");
  std::string prop1_out = "prop1";
  prop1->add_option("--out", prop1_out, "output basename");
  std::string prop1_problem_out;
  prop1->add_option("--problem-out", prop1_problem_out, "also export the problem JSON here");

  // prop2: the Gaussian slow-experimentation construction.
  auto* prop2 = app.add_subcommand(
      "prop2", "verify the Gaussian construction analytically (no simulation)");
  ConfigBuilder prop2_cfg(prop2);
  prop2_cfg.add_int("--n-max", "n_max", "sequence length (default 10000)");
  prop2_cfg.add_double("--target-sum", "target_sum", "infinite-sum target in (1/2,1) (default 0.75)");
  prop2_cfg.add_double("--delta", "delta", "discount for the deviation check (default 0.75)");
  prop2_cfg.add_double("--head-ratio", "head_ratio", "geometric head extension ratio (default 1.25)");
  prop2_cfg.add_int("--k-check", "k_check", "deviation stages to check (default 50)");
  prop2_cfg.add_double_list("--alpha,--alphas", "alphas", "curve exponents in (0,1) (default 0.5,0.9)");
  std::string prop2_out = "prop2";
  prop2->add_option("--out", prop2_out, "output basename");

  // bandit: single cell or grid.
  auto* bandit = app.add_subcommand(
      "bandit", "solve the one-arm bandit cut-off and check it against its a priori bound");
  ConfigBuilder bandit_cfg(bandit);
  bandit_cfg.add_double("--alpha", "alpha", "log-likelihood-ratio step (positive)");
  bandit_cfg.add_double("--p0a", "p0a", "bad-type probability of outcome a, in (0,1)");
  bandit_cfg.add_double("--rb", "rb", "reward of outcome b (default 0)");
  bandit_cfg.add_double("--delta", "delta", "discount factor in (0,1)");
  bandit_cfg.add_int("--seed", "seed", "master seed (default 7)");
  bandit_cfg.add_int("--visit-runs", "visit_runs", "visit-count Monte Carlo runs (default 10000)");
  bandit_cfg.add_int("--traj", "traj", "path-identity trajectories (default 1000)");
  bandit_cfg.add_int("--traj-cap", "traj_cap", "path-identity stage cap (default 10000)");
  bandit_cfg.add_int("--theorem-runs", "theorem_runs", "total-gap Monte Carlo runs (default 4000)");
  bandit_cfg.add_int("--theorem-cap", "theorem_cap", "total-gap stage cap (default 2000)");
  bandit_cfg.add_int("--k-max", "k_max", "lattice truncation override (default: sized from the bound)");
  bandit_cfg.add_int("--workers", "workers", "worker threads (default 4; results identical)");
  bandit_cfg.add_double_list("--alphas", "alphas", "grid mode: alpha values");
  bandit_cfg.add_double_list("--deltas", "deltas", "grid mode: delta values");
  bandit_cfg.add_double_list("--p0as", "p0as", "grid mode: p0_a values");
  std::string bandit_out = "bandit";
  bandit->add_option("--out", bandit_out, "output basename");

  // simulate: seeded Monte Carlo on an arbitrary problem file.
  auto* simulate = app.add_subcommand(
      "simulate", "estimate total experimentation for a problem JSON under a shipped rule");
  ConfigBuilder sim_cfg(simulate);
  std::string sim_problem;
  simulate->add_option("--problem", sim_problem, "problem JSON file")->required();
  sim_cfg.add_string("--rule", "rule", "decision rule: myopic, prop1 or cutoff (default myopic)");
  sim_cfg.add_int("--runs", "runs", "replications (default 10000)");
  sim_cfg.add_int("--seed", "seed", "master seed (default 7)");
  sim_cfg.add_int("--cap", "cap", "stage cap (default 100000)");
  sim_cfg.add_double_list("--eps-grid", "eps_grid", "thresholds for N(eps)");
  sim_cfg.add_int("--kstar", "kstar", "cut-off level (rule cutoff)");
  sim_cfg.add_double("--alpha", "alpha", "lattice step (rule cutoff)");
  sim_cfg.add_int("--workers", "workers", "worker threads (default 4; results identical)");
  std::string sim_out = "simulate";
  simulate->add_option("--out", sim_out, "output basename");

  // verify: re-check a stored report against the bound.
  auto* verify = app.add_subcommand("verify", "re-run the bound verdict on a stored report");
  std::string verify_report;
  verify->add_option("--report", verify_report, "report JSON file")->required();
  std::string verify_out = "verify";
  verify->add_option("--out", verify_out, "output basename");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;  // normalize usage errors to 1
  }

  if (prop1->parsed()) {
    std::string cfg = prop1_cfg.merged().dump();
    OwnedString report, csv, err;
    check_api(seqx_run_prop1(cfg.c_str(), &report.ptr, &csv.ptr, &err.ptr), err);
    if (!prop1_problem_out.empty()) {
      auto params = ordered_json::parse(report.str()).at("params");
      OwnedString problem, perr;
      check_api(seqx_prop1_problem_json(params.at("m").get<int>(),
                                        params.at("delta").get<double>(), &problem.ptr, &perr.ptr),
                perr);
      write_file(prop1_problem_out, problem.str());
      std::cout << "wrote " << prop1_problem_out << "\n";
    }
    auto family = ordered_json::parse(report.str()).at("family");
    std::cout << "value=" << family.at("value").get<double>()
              << " exact_total=" << family.at("exact_total").get<double>()
              << " bound=" << family.at("theorem_bound").get<double>()
              << " tightness_ratio=" << family.at("tightness_ratio").get<double>() << "\n";
    emit(prop1_out, report.str(), csv.str());
    return exit_code_for(report.str());
  }

  if (prop2->parsed()) {
    std::string cfg = prop2_cfg.merged().dump();
    OwnedString report, err;
    check_api(seqx_run_prop2(cfg.c_str(), &report.ptr, &err.ptr), err);
    emit(prop2_out, report.str(), "");
    return exit_code_for(report.str());
  }

  if (bandit->parsed()) {
    ordered_json cfg = bandit_cfg.merged();
    bool grid = cfg.contains("alphas") || cfg.contains("deltas") || cfg.contains("p0as");
    OwnedString report, csv, err;
    if (grid) {
      check_api(seqx_run_bandit_grid(cfg.dump().c_str(), &report.ptr, &csv.ptr, &err.ptr), err);
      emit(bandit_out, report.str(), csv.str(), ".grid.csv");
    } else {
      check_api(seqx_run_bandit(cfg.dump().c_str(), &report.ptr, &csv.ptr, &err.ptr), err);
      auto parsed = ordered_json::parse(report.str());
      std::cout << "kstar=" << parsed.at("cutoff").at("kstar").get<int>()
                << " bound=" << parsed.at("cutoff_bound").get<double>() << "\n";
      emit(bandit_out, report.str(), csv.str());
    }
    return exit_code_for(report.str());
  }

  if (simulate->parsed()) {
    std::string problem = read_file(sim_problem);
    std::string cfg = sim_cfg.merged().dump();
    OwnedString report, csv, err;
    check_api(seqx_run_simulate(problem.c_str(), cfg.c_str(), &report.ptr, &csv.ptr, &err.ptr), err);
    emit(sim_out, report.str(), csv.str());
    return exit_code_for(report.str());
  }

  if (verify->parsed()) {
    std::string report_in = read_file(verify_report);
    OwnedString verdict, err;
    check_api(seqx_verify_report(report_in.c_str(), &verdict.ptr, &err.ptr), err);
    emit(verify_out, verdict.str(), "");
    return exit_code_for(verdict.str());
  }

  return kExitUsage;
}
