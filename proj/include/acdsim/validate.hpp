#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "acdsim/config.hpp"

namespace acdsim {

struct ConfigIssue {
  std::string path;  // dotted field path, e.g. "topology.hosts[1].subnet"
  std::string message;
  int line = 0;      // 1-based source line when known
  bool operator==(const ConfigIssue&) const = default;
};

inline std::string describe(const ConfigIssue& issue) {
  std::string out;
  if (issue.line > 0) out += "line " + std::to_string(issue.line) + ": ";
  if (!issue.path.empty()) out += issue.path + ": ";
  return out + issue.message;
}

/// Raised with every issue found, not just the first.
class ScenarioError : public ConfigError {
 public:
  explicit ScenarioError(std::vector<ConfigIssue> issues)
      : ConfigError(summarize(issues)), issues_(std::move(issues)) {}
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  static std::string summarize(const std::vector<ConfigIssue>& issues) {
    std::string out = std::to_string(issues.size()) + " scenario error(s)";
    for (const auto& i : issues) out += "\n  " + describe(i);
    return out;
  }
  std::vector<ConfigIssue> issues_;
};

/// Cross-field checks on a structurally parsed config.
inline std::vector<ConfigIssue> validate_config(const ScenarioConfig& cfg) {
  std::vector<ConfigIssue> issues;
  auto fail = [&](std::string path, std::string msg) {
    issues.push_back({std::move(path), std::move(msg), 0});
  };
  auto prob = [&](const std::string& path, double p) {
    if (!(p >= 0.0 && p <= 1.0)) fail(path, "probability must be in [0, 1]");
  };
  auto idx = [](const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
  };

  if (cfg.schema_version != kSchemaVersion) {
    fail("schema_version", "unsupported schema version " + std::to_string(cfg.schema_version) +
                               " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (cfg.metadata.name.empty()) fail("metadata.name", "scenario name is required");
  if (cfg.metadata.problem.objective.empty()) {
    fail("metadata.problem.objective", "the problem block must state the defensive objective");
  }

  // topology
  const auto& topo = cfg.topology;
  std::set<std::string> subnets, services, hosts;
  for (std::size_t i = 0; i < topo.subnets.size(); ++i) {
    const auto& s = topo.subnets[i];
    if (s.empty()) fail(idx("topology.subnets", i), "subnet id must be non-empty");
    else if (!subnets.insert(s).second) fail(idx("topology.subnets", i), "duplicate subnet id: " + s);
  }
  for (std::size_t i = 0; i < topo.services.size(); ++i) {
    const auto& s = topo.services[i].id;
    if (s.empty()) fail(idx("topology.services", i) + ".id", "service id must be non-empty");
    else if (!services.insert(s).second) fail(idx("topology.services", i) + ".id", "duplicate service id: " + s);
  }
  if (topo.hosts.empty()) fail("topology.hosts", "empty topology");
  std::set<std::string> offered;
  for (std::size_t i = 0; i < topo.hosts.size(); ++i) {
    const auto& h = topo.hosts[i];
    const auto base = idx("topology.hosts", i);
    if (h.id.empty()) fail(base + ".id", "host id must be non-empty");
    else if (!hosts.insert(h.id).second) fail(base + ".id", "duplicate host id: " + h.id);
    if (!subnets.count(h.subnet)) fail(base + ".subnet", "unknown subnet: " + h.subnet);
    for (std::size_t j = 0; j < h.services.size(); ++j) {
      const auto& s = h.services[j];
      if (!services.count(s)) fail(idx(base + ".services", j), "unknown service: " + s);
      else if (!offered.insert(s).second) fail(idx(base + ".services", j), "service offered by more than one host: " + s);
    }
  }
  for (std::size_t i = 0; i < topo.adjacency.size(); ++i) {
    for (const auto& s : {topo.adjacency[i].first, topo.adjacency[i].second}) {
      if (!subnets.count(s)) fail(idx("topology.adjacency", i), "unknown subnet: " + s);
    }
  }
  for (std::size_t i = 0; i < topo.entry_subnets.size(); ++i) {
    if (!subnets.count(topo.entry_subnets[i])) {
      fail(idx("topology.entry_subnets", i), "unknown subnet: " + topo.entry_subnets[i]);
    }
  }

  // red
  const auto& red = cfg.red;
  for (auto stage : {KillStage::discover, KillStage::exploit, KillStage::escalate, KillStage::impact}) {
    const std::string name(to_string(stage));
    if (!(red.stage_delays.at(stage) > 0.0) || !std::isfinite(red.stage_delays.at(stage))) {
      fail("red.stage_delays." + name, "delay must be a positive number of seconds");
    }
    prob("red.success_probs." + name, red.success_probs.at(stage));
  }
  if (!(red.jitter >= 0.0 && red.jitter < 1.0)) fail("red.jitter", "jitter must be in [0, 1)");
  prob("red.switch_prob", red.switch_prob);
  prob("red.stealth", red.stealth);
  if (!(red.start_time >= 0.0)) fail("red.start_time", "start time must be >= 0");
  for (std::size_t i = 0; i < red.path.size(); ++i) {
    if (!hosts.count(red.path[i])) fail(idx("red.path", i), "unknown host: " + red.path[i]);
  }

  // green
  const auto& green = cfg.green;
  if (!(green.default_rate >= 0.0)) fail("green.default_rate", "rate must be >= 0");
  for (const auto& [h, r] : green.rates) {
    if (!hosts.count(h)) fail("green.rates." + h, "unknown host: " + h);
    if (!(r >= 0.0)) fail("green.rates." + h, "rate must be >= 0");
  }
  for (const auto& [s, w] : green.service_weights) {
    if (!services.count(s)) fail("green.service_weights." + s, "unknown service: " + s);
    if (!(w >= 0.0)) fail("green.service_weights." + s, "weight must be >= 0");
  }
  prob("green.anomaly_prob", green.anomaly_prob);

  // pomdp
  const auto& p = cfg.pomdp;
  if (!(p.gamma >= 0.0 && p.gamma <= 1.0)) fail("pomdp.gamma", "gamma must be in [0, 1]");
  switch (p.horizon.kind) {
    case HorizonKind::fixed:
      if (p.horizon.steps < 1) fail("pomdp.horizon.steps", "fixed horizon needs steps >= 1");
      break;
    case HorizonKind::terminal: {
      if (p.horizon.conditions.empty()) fail("pomdp.horizon.conditions", "terminal horizon needs at least one condition");
      const bool has_time = std::find(p.horizon.conditions.begin(), p.horizon.conditions.end(),
                                      TerminalCondition::max_time) != p.horizon.conditions.end();
      if (has_time && !(p.horizon.max_time > 0.0)) fail("pomdp.horizon.max_time", "max_time condition needs max_time > 0");
      break;
    }
    case HorizonKind::continuing:
      if (p.horizon.eval_window < 1) fail("pomdp.horizon.eval_window", "eval_window must be >= 1");
      break;
  }
  if (p.sequence.mode == SequenceMode::fixed_tick && !(p.sequence.dt > 0.0)) {
    fail("pomdp.sequence.dt", "fixed_tick needs dt > 0");
  }
  if (p.interleaving.mode == Interleaving::turn_based) {
    auto order = p.interleaving.order;
    std::sort(order.begin(), order.end());
    if (order != std::vector<Actor>{Actor::red, Actor::green}) {
      fail("pomdp.interleaving.order", "order must list red and green exactly once");
    }
    const double q = p.interleaving.quantum > 0.0
                         ? p.interleaving.quantum
                         : (p.sequence.mode == SequenceMode::fixed_tick ? p.sequence.dt : 0.0);
    if (!(q > 0.0)) fail("pomdp.interleaving.quantum", "turn_based interleaving needs a slot quantum > 0");
  }
  if (p.interleaving.quantum < 0.0) fail("pomdp.interleaving.quantum", "quantum must be >= 0");

  const auto& s = p.sensor;
  prob("pomdp.sensor.detection_prob", s.detection_prob);
  prob("pomdp.sensor.false_positive_prob", s.false_positive_prob);
  if (!(s.report_delay >= 0.0)) fail("pomdp.sensor.report_delay", "report delay must be >= 0");
  if (s.fields.empty()) fail("pomdp.sensor.fields", "at least one observation field is required");
  {
    std::set<Feature> seen;
    for (std::size_t i = 0; i < s.fields.size(); ++i) {
      if (!seen.insert(s.fields[i]).second) fail(idx("pomdp.sensor.fields", i), "duplicate field");
      if (is_oracle_feature(s.fields[i]) && s.mode != SensorMode::omniscient_oracle) {
        fail(idx("pomdp.sensor.fields", i),
             std::string(to_string(s.fields[i])) + " is ground truth; only allowed with omniscient_oracle");
      }
    }
  }

  std::size_t passes = 0, stops = 0;
  bool other_actions = false;
  for (std::size_t i = 0; i < p.actions.size(); ++i) {
    const auto& a = p.actions[i];
    const auto base = idx("pomdp.actions", i);
    if (a.kind == ActionKind::pass) ++passes;
    else if (a.kind == ActionKind::stop) ++stops;
    else other_actions = true;
    for (std::size_t j = 0; j < a.targets.size(); ++j) {
      if (!hosts.count(a.targets[j])) fail(idx(base + ".targets", j), "unknown host: " + a.targets[j]);
    }
    prob(base + ".success_prob", a.success_prob);
    const bool needs_duration =
        a.kind != ActionKind::stop &&
        (a.kind != ActionKind::pass || p.sequence.mode == SequenceMode::action_duration);
    if (needs_duration && !(a.duration > 0.0)) fail(base + ".duration", "duration must be > 0");
    if (a.kind == ActionKind::pass && !(a.duration >= 0.0)) fail(base + ".duration", "duration must be >= 0");
    if (a.cost) {
      if (a.kind == ActionKind::pass) fail(base + ".cost", "pass is rewarded through reward.pass_bonus");
      else if (!std::isfinite(*a.cost) || *a.cost > 0.0) fail(base + ".cost", "cost must be finite and <= 0");
    }
    if (a.preconditions && (a.kind == ActionKind::pass || a.kind == ActionKind::stop)) {
      fail(base + ".preconditions", "pass and stop take no preconditions");
    }
  }
  if (passes != 1) fail("pomdp.actions", "exactly one pass action is required");
  if (stops > 1) fail("pomdp.actions", "at most one stop action");

  const auto& r = p.reward;
  for (double v : {r.compromise_penalty, r.restore_cost, r.pass_bonus, r.terminal_penalty,
                   r.false_stop_cost, r.missed_intrusion_cost}) {
    if (!std::isfinite(v)) fail("pomdp.reward", "reward parameters must be finite");
  }
  for (const auto& [role, w] : r.role_weights) {
    if (!std::isfinite(w)) fail("pomdp.reward.role_weights", "weights must be finite");
  }
  if (stops > 0 && r.kind != RewardKind::optimal_stopping) {
    fail("pomdp.actions", "stop is only available with the optimal_stopping reward");
  }
  if (r.kind == RewardKind::optimal_stopping && (stops != 1 || other_actions)) {
    fail("pomdp.actions", "optimal_stopping uses exactly the actions pass and stop");
  }
  return issues;
}

}  // namespace acdsim
