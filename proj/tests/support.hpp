#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "acdsim/acdsim.hpp"

namespace acdsim::testing {

inline std::string scenario_path(const std::string& name) { return std::string(ACDSIM_SCENARIOS) + "/" + name; }

inline ScenarioConfig load_mvp() { return load_scenario(scenario_path("mvp-2host.yaml")); }
inline ScenarioConfig load_oracle() { return load_scenario(scenario_path("mvp-2host-oracle.yaml")); }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline ActionSpec action_spec(ActionKind kind) {
  ActionSpec a;
  a.kind = kind;
  return a;
}

/// One subnet, hosts h0..h(n-1), each with its own vulnerable service, red
/// walking them in order, no green traffic, the standard blue action set.
inline ScenarioConfig small_config(std::size_t hosts = 2) {
  ScenarioConfig c;
  c.metadata.name = "small";
  c.metadata.problem.objective = "keep hosts clean";
  c.topology.subnets = {"lan"};
  c.topology.entry_subnets = {"lan"};
  for (std::size_t i = 0; i < hosts; ++i) {
    const auto id = "h" + std::to_string(i);
    c.topology.services.push_back({"svc" + std::to_string(i), true});
    c.topology.hosts.push_back({id, "lan", i + 1 == hosts ? Role::critical_server : Role::workstation,
                                {"svc" + std::to_string(i)}, Compromise::none});
  }
  for (auto k : {ActionKind::pass, ActionKind::scan, ActionKind::restore, ActionKind::quarantine,
                 ActionKind::release}) {
    ActionSpec a;
    a.kind = k;
    c.pomdp.actions.push_back(a);
  }
  return c;
}

/// A random but valid scenario: 1-4 hosts over 1-3 chained subnets, random
/// red and green settings, sensor noise, sequencing, horizon, and reward.
inline ScenarioConfig random_scenario(std::mt19937_64& rng) {
  auto u = [&] { return unit_interval(rng()); };
  auto pick = [&](std::size_t n) { return scale_index(u(), n); };
  ScenarioConfig c;
  c.metadata.name = "random";
  c.metadata.problem.objective = "property testing";
  const auto nsub = 1 + pick(3);
  for (std::size_t s = 0; s < nsub; ++s) {
    c.topology.subnets.push_back("s" + std::to_string(s));
    if (s > 0) c.topology.adjacency.push_back({"s" + std::to_string(s - 1), "s" + std::to_string(s)});
  }
  c.topology.entry_subnets = {"s0"};
  const auto nh = 1 + pick(4);
  for (std::size_t i = 0; i < nh; ++i) {
    const auto sid = "svc" + std::to_string(i);
    c.topology.services.push_back({sid, u() < 0.85});
    HostConfig h;
    h.id = "h" + std::to_string(i);
    h.subnet = c.topology.subnets[pick(nsub)];
    h.role = static_cast<Role>(pick(3));
    h.services = {sid};
    if (u() < 0.1) h.initial_compromise = Compromise::user;
    c.topology.hosts.push_back(h);
  }
  auto& red = c.red;
  red.mode = static_cast<RedMode>(pick(3));
  red.targeting = static_cast<Targeting>(pick(3));
  red.alt_targeting = static_cast<Targeting>(pick(3));
  red.start_time = 30.0 * static_cast<double>(pick(4));
  red.stage_delays = {20.0 + 80.0 * u(), 20.0 + 80.0 * u(), 20.0 + 80.0 * u(), 20.0 + 80.0 * u()};
  red.jitter = 0.5 * u();
  red.success_probs = {u(), u(), u(), u()};
  red.switch_prob = u();
  red.stealth = 0.3 * u();
  c.green.default_rate = u() < 0.3 ? 0.0 : 60.0 * u();
  c.green.anomaly_prob = u();

  auto& p = c.pomdp;
  p.gamma = 0.9;
  p.sequence.mode = u() < 0.7 ? SequenceMode::fixed_tick : SequenceMode::action_duration;
  p.sequence.dt = 60.0;
  p.interleaving.mode = u() < 0.5 ? Interleaving::concurrent : Interleaving::turn_based;
  if (u() < 0.5) p.interleaving.order = {Actor::green, Actor::red};
  p.interleaving.quantum = p.sequence.mode == SequenceMode::action_duration ? 30.0 : 0.0;
  p.sensor.detection_prob = u();
  p.sensor.false_positive_prob = u();
  p.sensor.report_delay = u() < 0.5 ? 0.0 : 90.0 * u();
  p.sensor.fields = {Feature::role, Feature::detected_compromise, Feature::alert_count, Feature::quarantined};
  p.lenient_mask = u() < 0.5;

  const auto reward = pick(3);
  if (reward == 2) {
    p.reward.kind = RewardKind::optimal_stopping;
    p.actions = {action_spec(ActionKind::pass), action_spec(ActionKind::stop)};
  } else {
    p.reward.kind = reward == 0 ? RewardKind::dense_default : RewardKind::sparse;
    for (auto k : {ActionKind::pass, ActionKind::scan, ActionKind::restore, ActionKind::quarantine,
                   ActionKind::release}) {
      ActionSpec a;
      a.kind = k;
      a.duration = 10.0 + 80.0 * u();
      a.success_prob = 0.5 + 0.5 * u();
      p.actions.push_back(a);
    }
  }
  switch (pick(3)) {
    case 0:
      p.horizon.kind = HorizonKind::fixed;
      p.horizon.steps = static_cast<int>(1 + pick(40));
      break;
    case 1:
      p.horizon.kind = HorizonKind::terminal;
      p.horizon.conditions = {TerminalCondition::critical_impacted, TerminalCondition::stop};
      break;
    default:
      p.horizon.kind = HorizonKind::continuing;
      p.horizon.eval_window = static_cast<int>(1 + pick(40));
      break;
  }
  return c;
}

}  // namespace acdsim::testing
