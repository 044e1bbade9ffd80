#pragma once

// Declarative scenario types shared by every layer of the simulator.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace acdsim {

using HostId = std::string;
using ServiceId = std::string;
using SubnetId = std::string;

enum class Role { workstation, server, critical_server };
enum class Compromise { none, user, root };
enum class Actor { red, green, blue, system };

enum class RedMode { deterministic, stochastic, switching };
enum class Targeting { fixed_path, random_reachable, prefer_critical };
enum class KillStage { discover, exploit, escalate, impact };

enum class HorizonKind { fixed, terminal, continuing };
enum class TerminalCondition { critical_impacted, all_compromised, stop, max_time };
enum class SequenceMode { fixed_tick, action_duration };
enum class Interleaving { turn_based, concurrent };
enum class SensorMode { realistic, omniscient_oracle };
enum class Feature { role, detected_compromise, alert_count, quarantined, compromise_level, red_stage };
enum class ActionKind { pass, scan, restore, quarantine, release, stop };
enum class Precondition { detected, not_detected, quarantined, not_quarantined };
enum class RewardKind { dense_default, sparse, optimal_stopping };

// ---------------------------------------------------------------------------
// enum <-> text

template <typename E>
struct EnumNames;

#define ACDSIM_ENUM_NAMES(E, ...)                                      \
  template <>                                                          \
  struct EnumNames<E> {                                                \
    static constexpr auto names = std::to_array<std::string_view>({__VA_ARGS__}); \
    static constexpr std::string_view type = #E;                       \
  }

ACDSIM_ENUM_NAMES(Role, "workstation", "server", "critical_server");
ACDSIM_ENUM_NAMES(Compromise, "none", "user", "root");
ACDSIM_ENUM_NAMES(Actor, "red", "green", "blue", "system");
ACDSIM_ENUM_NAMES(RedMode, "deterministic", "stochastic", "switching");
ACDSIM_ENUM_NAMES(Targeting, "fixed_path", "random_reachable", "prefer_critical");
ACDSIM_ENUM_NAMES(KillStage, "discover", "exploit", "escalate", "impact");
ACDSIM_ENUM_NAMES(HorizonKind, "fixed", "terminal", "continuing");
ACDSIM_ENUM_NAMES(TerminalCondition, "critical_impacted", "all_compromised", "stop", "max_time");
ACDSIM_ENUM_NAMES(SequenceMode, "fixed_tick", "action_duration");
ACDSIM_ENUM_NAMES(Interleaving, "turn_based", "concurrent");
ACDSIM_ENUM_NAMES(SensorMode, "realistic", "omniscient_oracle");
ACDSIM_ENUM_NAMES(Feature, "role", "detected_compromise", "alert_count", "quarantined",
                  "compromise_level", "red_stage");
ACDSIM_ENUM_NAMES(ActionKind, "pass", "scan", "restore", "quarantine", "release", "stop");
ACDSIM_ENUM_NAMES(Precondition, "detected", "not_detected", "quarantined", "not_quarantined");
ACDSIM_ENUM_NAMES(RewardKind, "dense_default", "sparse", "optimal_stopping");

#undef ACDSIM_ENUM_NAMES

template <typename E>
constexpr std::string_view to_string(E value) {
  return EnumNames<E>::names.at(static_cast<std::size_t>(value));
}

template <typename E>
std::optional<E> enum_from_string(std::string_view text) {
  const auto& names = EnumNames<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == text) return static_cast<E>(i);
  }
  return std::nullopt;
}

template <typename E>
std::string enum_choices() {
  std::string out;
  for (auto n : EnumNames<E>::names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

// ---------------------------------------------------------------------------
// topology

struct ServiceConfig {
  ServiceId id;
  bool vulnerable = true;
  bool operator==(const ServiceConfig&) const = default;
};

struct HostConfig {
  HostId id;
  SubnetId subnet;
  Role role = Role::workstation;
  std::vector<ServiceId> services;
  // Pre-existing foothold at episode start.
  Compromise initial_compromise = Compromise::none;
  bool operator==(const HostConfig&) const = default;
};

struct TopologyConfig {
  std::vector<SubnetId> subnets;
  // Undirected subnet links; a subnet always reaches itself.
  std::vector<std::pair<SubnetId, SubnetId>> adjacency;
  // Subnets reachable from outside the network.
  std::vector<SubnetId> entry_subnets;
  std::vector<ServiceConfig> services;
  std::vector<HostConfig> hosts;
  bool operator==(const TopologyConfig&) const = default;
};

// ---------------------------------------------------------------------------
// actors

struct StageValues {
  double discover = 0.0;
  double exploit = 0.0;
  double escalate = 0.0;
  double impact = 0.0;

  double at(KillStage s) const {
    switch (s) {
      case KillStage::discover: return discover;
      case KillStage::exploit: return exploit;
      case KillStage::escalate: return escalate;
      case KillStage::impact: return impact;
    }
    return 0.0;
  }
  bool operator==(const StageValues&) const = default;
};

struct RedStrategyConfig {
  bool enabled = true;
  RedMode mode = RedMode::deterministic;
  Targeting targeting = Targeting::fixed_path;
  // Mode swapped in and out by switching campaigns.
  Targeting alt_targeting = Targeting::random_reachable;
  // fixed_path order; empty means host declaration order.
  std::vector<HostId> path;
  double start_time = 60.0;
  StageValues stage_delays{60.0, 60.0, 60.0, 60.0};
  double jitter = 0.0;
  StageValues success_probs{1.0, 1.0, 1.0, 1.0};
  double switch_prob = 0.0;
  double stealth = 0.0;
  bool operator==(const RedStrategyConfig&) const = default;
};

struct GreenProfileConfig {
  // Requests per simulated hour, per requesting host.
  double default_rate = 0.0;
  std::map<HostId, double> rates;
  // Relative request weight per target service; empty means uniform.
  std::map<ServiceId, double> service_weights;
  double anomaly_prob = 0.0;
  bool operator==(const GreenProfileConfig&) const = default;
};

// ---------------------------------------------------------------------------
// task

struct HorizonConfig {
  HorizonKind kind = HorizonKind::fixed;
  int steps = 30;
  std::vector<TerminalCondition> conditions;
  double max_time = 0.0;
  int eval_window = 100;
  bool operator==(const HorizonConfig&) const = default;
};

struct SequenceConfig {
  SequenceMode mode = SequenceMode::fixed_tick;
  double dt = 60.0;
  bool operator==(const SequenceConfig&) const = default;
};

struct InterleavingConfig {
  Interleaving mode = Interleaving::concurrent;
  std::vector<Actor> order{Actor::red, Actor::green};
  // Slot width for turn-based snapping; 0 means the tick dt.
  double quantum = 0.0;
  bool operator==(const InterleavingConfig&) const = default;
};

struct SensorConfig {
  SensorMode mode = SensorMode::realistic;
  double detection_prob = 1.0;
  double false_positive_prob = 0.0;
  double report_delay = 0.0;
  std::vector<Feature> fields{Feature::detected_compromise, Feature::quarantined};
  bool operator==(const SensorConfig&) const = default;
};

struct ActionSpec {
  ActionKind kind = ActionKind::pass;
  // Target hosts; empty means every host. Ignored for pass and stop.
  std::vector<HostId> targets;
  double duration = 30.0;
  double success_prob = 1.0;
  std::optional<double> cost;
  std::optional<std::vector<Precondition>> preconditions;
  bool operator==(const ActionSpec&) const = default;
};

struct RewardConfig {
  RewardKind kind = RewardKind::dense_default;
  // dense_default
  double compromise_penalty = -2.0;
  double restore_cost = -1.0;
  double pass_bonus = 0.1;
  std::map<Role, double> role_weights;
  // sparse
  double terminal_penalty = -10.0;
  // optimal_stopping
  double false_stop_cost = -5.0;
  double missed_intrusion_cost = -1.0;
  bool operator==(const RewardConfig&) const = default;
};

struct PomdpSpec {
  double gamma = 0.9;
  HorizonConfig horizon;
  SequenceConfig sequence;
  InterleavingConfig interleaving;
  SensorConfig sensor;
  std::vector<ActionSpec> actions;
  RewardConfig reward;
  bool lenient_mask = false;
  bool operator==(const PomdpSpec&) const = default;
};

struct ProblemStatement {
  std::string objective;
  std::string defender;
  std::string adversary;
  std::vector<std::string> uncertainties;
  bool operator==(const ProblemStatement&) const = default;
};

struct Metadata {
  std::string name;
  std::string description;
  ProblemStatement problem;
  bool operator==(const Metadata&) const = default;
};

inline constexpr int kSchemaVersion = 1;

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  Metadata metadata;
  TopologyConfig topology;
  RedStrategyConfig red;
  GreenProfileConfig green;
  PomdpSpec pomdp;
  std::uint64_t seed = 0;
  bool operator==(const ScenarioConfig&) const = default;
};

inline std::vector<Precondition> default_preconditions(ActionKind kind) {
  switch (kind) {
    case ActionKind::restore: return {Precondition::detected};
    case ActionKind::quarantine: return {Precondition::detected, Precondition::not_quarantined};
    case ActionKind::release: return {Precondition::quarantined};
    default: return {};
  }
}

inline bool is_oracle_feature(Feature f) {
  return f == Feature::compromise_level || f == Feature::red_stage;
}

/// Construction-time failure (bad IDs, empty topology, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace acdsim
