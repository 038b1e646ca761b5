#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace seqexp {

using ordered_json = nlohmann::ordered_json;

namespace {

double sum_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

int index_of(const std::vector<std::string>& labels, const std::string& label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

}  // namespace

ParameterSpace ParameterSpace::normalized() const {
  ParameterSpace out = *this;
  double s = sum_of(out.prior);
  if (s <= 0.0) fail(ErrorCode::invalid_argument, "cannot normalize a prior with nonpositive mass");
  for (double& w : out.prior) w /= s;
  return out;
}

Belief Belief::normalized() const {
  Belief out = *this;
  double s = sum_of(out.weights);
  if (s <= 0.0) fail(ErrorCode::invalid_argument, "cannot normalize a belief with nonpositive mass");
  for (double& w : out.weights) w /= s;
  return out;
}

Belief Belief::uniform(std::size_t n) {
  Belief b;
  b.weights.assign(n, 1.0 / static_cast<double>(n));
  return b;
}

Belief Belief::point_mass(std::size_t index, std::size_t n) {
  Belief b;
  b.weights.assign(n, 0.0);
  b.weights.at(index) = 1.0;
  return b;
}

int DecisionProblem::param_index(const std::string& label) const {
  return index_of(params.labels, label);
}

int DecisionProblem::action_index(const std::string& label) const {
  return index_of(actions, label);
}

int DecisionProblem::obs_index(const std::string& label) const {
  return index_of(observations, label);
}

std::string to_string(const Violation& v) {
  return v.invariant + " at " + v.location + ": " + v.detail;
}

std::vector<Violation> validate_problem(const DecisionProblem& p) {
  std::vector<Violation> out;
  auto add = [&out](std::string invariant, std::string location, std::string detail) {
    out.push_back({std::move(invariant), std::move(location), std::move(detail)});
  };

  const std::size_t K = p.params.size();
  const std::size_t A = p.actions.size();
  const std::size_t O = p.observations.size();

  if (K == 0) add("parameter-space-nonempty", "parameters.labels", "no parameter labels");
  if (A == 0) add("action-set-nonempty", "actions", "no actions");
  if (O == 0) add("observation-set-nonempty", "observations", "no observation symbols");

  if (p.params.prior.size() != K) {
    add("prior-length", "parameters.prior",
        "prior has " + std::to_string(p.params.prior.size()) + " entries for " +
            std::to_string(K) + " labels");
  } else if (K > 0) {
    for (std::size_t i = 0; i < K; ++i) {
      double w = p.params.prior[i];
      if (!(w >= -kProbTol && w <= 1.0 + kProbTol) || !std::isfinite(w)) {
        add("prior-entry-range", "parameters.prior[" + std::to_string(i) + "]",
            "entry " + std::to_string(w) + " outside [0,1]");
      }
    }
    double s = sum_of(p.params.prior);
    if (std::abs(s - 1.0) > kProbTol) {
      std::ostringstream os;
      os.precision(17);
      os << "prior sums to " << s;
      add("prior-normalization", "parameters.prior", os.str());
    }
  }

  for (auto labels : {&p.params.labels, &p.actions, &p.observations, &p.kernel.states}) {
    for (const auto& l : *labels) {
      if (l.find('/') != std::string::npos)
        add("label-no-slash", "label '" + l + "'", "labels may not contain '/'");
    }
  }

  if (p.reward.size() != K * A) {
    add("reward-table-shape", "rewards",
        "table has " + std::to_string(p.reward.size()) + " entries, expected " +
            std::to_string(K * A));
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t a = 0; a < A; ++a) {
        double r = p.reward[k * A + a];
        if (!std::isfinite(r)) {
          add("reward-finite", "rewards[" + p.params.labels[k] + "/" + p.actions[a] + "]",
              "entry is not finite");
        }
      }
    }
  }

  if (!(p.discount >= 0.0 && p.discount < 1.0)) {
    add("discount-range", "discount",
        "discount " + std::to_string(p.discount) + " outside [0,1)");
  }

  const auto& k = p.kernel;
  const std::size_t S = k.states.size();
  if (S == 0) {
    add("automaton-nonempty", "automaton.states", "no states");
    return out;
  }
  if (k.start < 0 || k.start >= static_cast<int>(S)) {
    add("automaton-start", "automaton.start", "start state index out of range");
  }
  if (k.n_actions != static_cast<int>(A) || k.n_params != static_cast<int>(K) ||
      k.n_obs != static_cast<int>(O)) {
    add("automaton-dimensions", "automaton",
        "automaton dimensions do not match the problem's action/parameter/observation counts");
    return out;
  }
  if (k.transition.size() != S * A) {
    add("transition-total", "automaton.transitions",
        "table has " + std::to_string(k.transition.size()) + " entries, expected " +
            std::to_string(S * A));
  } else {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t a = 0; a < A; ++a) {
        int t = k.transition[s * A + a];
        if (t < 0 || t >= static_cast<int>(S)) {
          add("transition-target", "automaton.transitions[" + k.states[s] + "/" + p.actions[a] + "]",
              "target index out of range");
        }
      }
    }
  }
  if (k.emission.size() != S * K * O) {
    add("emission-shape", "automaton.emissions",
        "table has " + std::to_string(k.emission.size()) + " entries, expected " +
            std::to_string(S * K * O));
  } else {
    for (std::size_t s = 0; s < S; ++s) {
      for (std::size_t q = 0; q < K; ++q) {
        double row_sum = 0.0;
        bool range_ok = true;
        for (std::size_t o = 0; o < O; ++o) {
          double e = k.emission[(s * K + q) * O + o];
          row_sum += e;
          if (!(e >= -kProbTol && e <= 1.0 + kProbTol) || !std::isfinite(e)) range_ok = false;
        }
        std::string loc = "automaton.emissions[" + k.states[s] + "/" + p.params.labels[q] + "]";
        if (!range_ok) add("emission-entry-range", loc, "an entry falls outside [0,1]");
        if (std::abs(row_sum - 1.0) > kProbTol) {
          std::ostringstream os;
          os.precision(17);
          os << "row sums to " << row_sum;
          add("emission-normalization", loc, os.str());
        }
      }
    }
  }

  return out;
}

void require_valid(const DecisionProblem& p) {
  auto violations = validate_problem(p);
  if (violations.empty()) return;
  std::string msg = "invalid decision problem:";
  for (const auto& v : violations) msg += "\n  - " + to_string(v);
  fail(ErrorCode::invalid_argument, msg);
}

std::pair<double, double> expected_extreme_rewards(const DecisionProblem& p) {
  const std::size_t K = p.n_params();
  const std::size_t A = p.n_actions();
  double hi = 0.0, lo = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double best = p.reward[k * A];
    double worst = best;
    for (std::size_t a = 1; a < A; ++a) {
      best = std::max(best, p.reward[k * A + a]);
      worst = std::min(worst, p.reward[k * A + a]);
    }
    hi += p.params.prior[k] * best;
    lo += p.params.prior[k] * worst;
  }
  return {hi, lo};
}

// --- JSON schema v1 ---------------------------------------------------------

std::string problem_to_json(const DecisionProblem& p, int indent) {
  ordered_json j;
  j["schema_version"] = 1;
  j["parameters"]["labels"] = p.params.labels;
  j["parameters"]["prior"] = p.params.prior;
  j["actions"] = p.actions;
  j["observations"] = p.observations;

  ordered_json rewards = ordered_json::object();
  for (std::size_t k = 0; k < p.n_params(); ++k)
    for (std::size_t a = 0; a < p.n_actions(); ++a)
      rewards[p.params.labels[k] + "/" + p.actions[a]] = p.reward[k * p.n_actions() + a];
  j["rewards"] = std::move(rewards);

  j["discount"] = p.discount;

  const auto& k = p.kernel;
  ordered_json autom;
  autom["states"] = k.states;
  autom["start"] = k.states.at(static_cast<std::size_t>(k.start));
  ordered_json trans = ordered_json::object();
  for (std::size_t s = 0; s < k.states.size(); ++s)
    for (std::size_t a = 0; a < p.n_actions(); ++a)
      trans[k.states[s] + "/" + p.actions[a]] =
          k.states.at(static_cast<std::size_t>(k.transition[s * p.n_actions() + a]));
  autom["transitions"] = std::move(trans);
  ordered_json emis = ordered_json::object();
  for (std::size_t s = 0; s < k.states.size(); ++s) {
    for (std::size_t q = 0; q < p.n_params(); ++q) {
      ordered_json row = ordered_json::object();
      for (std::size_t o = 0; o < p.n_obs(); ++o) {
        double e = k.emission[(s * p.n_params() + q) * p.n_obs() + o];
        if (e != 0.0) row[p.observations[o]] = e;
      }
      emis[k.states[s] + "/" + p.params.labels[q]] = std::move(row);
    }
  }
  autom["emissions"] = std::move(emis);
  j["automaton"] = std::move(autom);

  return j.dump(indent);
}

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  fail(ErrorCode::parse_error, "problem schema: " + what);
}

const ordered_json& member(const ordered_json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) parse_fail("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

std::vector<std::string> string_list(const ordered_json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) parse_fail(where + " must be a nonempty array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) parse_fail(where + " must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

// Splits "left/right" where `left` must be a known label.
std::pair<int, std::string> split_key(const std::string& key,
                                      const std::vector<std::string>& left_labels,
                                      const std::string& where) {
  auto pos = key.find('/');
  if (pos == std::string::npos) parse_fail("key '" + key + "' in " + where + " lacks a '/'");
  std::string left = key.substr(0, pos);
  std::string right = key.substr(pos + 1);
  int li = index_of(left_labels, left);
  if (li < 0) parse_fail("key '" + key + "' in " + where + " names unknown label '" + left + "'");
  return {li, right};
}

}  // namespace

DecisionProblem problem_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    parse_fail(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) parse_fail("top level must be an object");

  const auto& ver = member(j, "schema_version", "top level");
  if (!ver.is_number_integer() || ver.get<int>() != 1)
    parse_fail("unsupported schema_version (expected 1)");

  DecisionProblem p;
  const auto& params = member(j, "parameters", "top level");
  p.params.labels = string_list(member(params, "labels", "parameters"), "parameters.labels");
  const auto& prior = member(params, "prior", "parameters");
  if (!prior.is_array()) parse_fail("parameters.prior must be an array");
  for (const auto& e : prior) {
    if (!e.is_number()) parse_fail("parameters.prior must contain numbers");
    p.params.prior.push_back(e.get<double>());
  }

  p.actions = string_list(member(j, "actions", "top level"), "actions");
  p.observations = string_list(member(j, "observations", "top level"), "observations");

  for (auto labels : {&p.params.labels, &p.actions, &p.observations}) {
    for (const auto& l : *labels)
      if (l.find('/') != std::string::npos)
        parse_fail("label '" + l + "' contains '/', which is reserved for table keys");
  }

  const std::size_t K = p.params.size();
  const std::size_t A = p.actions.size();
  const std::size_t O = p.observations.size();

  const auto& rewards = member(j, "rewards", "top level");
  if (!rewards.is_object()) parse_fail("rewards must be an object keyed by 'parameter/action'");
  p.reward.assign(K * A, std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(K * A, false);
  for (auto it = rewards.begin(); it != rewards.end(); ++it) {
    auto [k, action_label] = split_key(it.key(), p.params.labels, "rewards");
    int a = index_of(p.actions, action_label);
    if (a < 0) parse_fail("key '" + it.key() + "' in rewards names unknown action '" + action_label + "'");
    if (!it.value().is_number()) parse_fail("rewards['" + it.key() + "'] must be a number");
    p.reward[static_cast<std::size_t>(k) * A + a] = it.value().get<double>();
    seen[static_cast<std::size_t>(k) * A + a] = true;
  }
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t a = 0; a < A; ++a)
      if (!seen[k * A + a])
        parse_fail("rewards is missing entry '" + p.params.labels[k] + "/" + p.actions[a] + "'");

  const auto& disc = member(j, "discount", "top level");
  if (!disc.is_number()) parse_fail("discount must be a number");
  p.discount = disc.get<double>();

  const auto& autom = member(j, "automaton", "top level");
  auto& k = p.kernel;
  k.states = string_list(member(autom, "states", "automaton"), "automaton.states");
  for (const auto& l : k.states)
    if (l.find('/') != std::string::npos)
      parse_fail("state label '" + l + "' contains '/'");
  const auto& start = member(autom, "start", "automaton");
  if (!start.is_string()) parse_fail("automaton.start must be a state label");
  k.start = index_of(k.states, start.get<std::string>());
  if (k.start < 0) parse_fail("automaton.start names unknown state '" + start.get<std::string>() + "'");

  const std::size_t S = k.states.size();
  k.n_actions = static_cast<int>(A);
  k.n_params = static_cast<int>(K);
  k.n_obs = static_cast<int>(O);

  const auto& trans = member(autom, "transitions", "automaton");
  if (!trans.is_object()) parse_fail("automaton.transitions must be an object keyed by 'state/action'");
  k.transition.assign(S * A, -1);
  for (auto it = trans.begin(); it != trans.end(); ++it) {
    auto [s, action_label] = split_key(it.key(), k.states, "automaton.transitions");
    int a = index_of(p.actions, action_label);
    if (a < 0) parse_fail("key '" + it.key() + "' names unknown action '" + action_label + "'");
    if (!it.value().is_string()) parse_fail("transition targets must be state labels");
    int t = index_of(k.states, it.value().get<std::string>());
    if (t < 0) parse_fail("transition '" + it.key() + "' targets unknown state");
    k.transition[static_cast<std::size_t>(s) * A + a] = t;
  }
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a)
      if (k.transition[s * A + a] < 0)
        parse_fail("automaton.transitions is missing entry '" + k.states[s] + "/" + p.actions[a] + "'");

  const auto& emis = member(autom, "emissions", "automaton");
  if (!emis.is_object()) parse_fail("automaton.emissions must be an object keyed by 'state/parameter'");
  k.emission.assign(S * K * O, 0.0);
  std::vector<bool> seen_row(S * K, false);
  for (auto it = emis.begin(); it != emis.end(); ++it) {
    auto [s, param_label] = split_key(it.key(), k.states, "automaton.emissions");
    int q = index_of(p.params.labels, param_label);
    if (q < 0) parse_fail("key '" + it.key() + "' names unknown parameter '" + param_label + "'");
    if (!it.value().is_object()) parse_fail("emission rows must be objects mapping observation to probability");
    for (auto ot = it.value().begin(); ot != it.value().end(); ++ot) {
      int o = index_of(p.observations, ot.key());
      if (o < 0) parse_fail("emission row '" + it.key() + "' names unknown observation '" + ot.key() + "'");
      if (!ot.value().is_number()) parse_fail("emission probabilities must be numbers");
      k.emission[(static_cast<std::size_t>(s) * K + q) * O + o] = ot.value().get<double>();
    }
    seen_row[static_cast<std::size_t>(s) * K + q] = true;
  }
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t q = 0; q < K; ++q)
      if (!seen_row[s * K + q])
        parse_fail("automaton.emissions is missing row '" + k.states[s] + "/" + p.params.labels[q] + "'");

  return p;
}

}  // namespace seqexp
