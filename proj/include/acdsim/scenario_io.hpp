#pragma once

// YAML scenario files: strict parsing with exhaustive, located error
// reports, and canonical serialization.

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "acdsim/config.hpp"
#include "acdsim/netsim.hpp"
#include "acdsim/random.hpp"
#include "acdsim/validate.hpp"

namespace acdsim {

namespace detail {

class YamlReader {
 public:
  std::vector<ConfigIssue> issues;
  std::map<std::string, int> lines;

  void error(const std::string& path, const YAML::Node& node, std::string msg) {
    issues.push_back({path, std::move(msg), node.IsDefined() ? line_of(node) : line_for(path)});
  }

  static int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

  int line_for(std::string path) const {
    // Fall back to the nearest recorded ancestor.
    while (true) {
      if (auto it = lines.find(path); it != lines.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos) return 0;
      path.resize(cut);
    }
  }

  bool mapping(const YAML::Node& node, const std::string& path,
               std::initializer_list<std::string_view> allowed) {
    lines[path] = line_of(node);
    if (!node.IsMap()) {
      error(path, node, "expected a mapping");
      return false;
    }
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      const auto child = path.empty() ? key : path + "." + key;
      lines[child] = line_of(kv.first);
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        error(child, kv.first, "unknown field '" + key + "'");
      }
    }
    return true;
  }

  bool sequence(const YAML::Node& node, const std::string& path) {
    lines[path] = line_of(node);
    if (!node.IsSequence()) {
      error(path, node, "expected a list");
      return false;
    }
    return true;
  }

  static std::string join(const std::string& base, std::string_view key) {
    return base.empty() ? std::string(key) : base + "." + std::string(key);
  }
  static std::string at(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
  }

  template <typename T>
  bool scalar(const YAML::Node& node, const std::string& path, T& out) {
    lines[path] = line_of(node);
    if (!node.IsScalar()) {
      error(path, node, "expected a scalar");
      return false;
    }
    try {
      out = node.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      error(path, node, "invalid value '" + node.Scalar() + "'");
      return false;
    }
  }

  template <typename E>
  bool enumeration(const YAML::Node& node, const std::string& path, E& out) {
    std::string text;
    if (!scalar(node, path, text)) return false;
    if (auto v = enum_from_string<E>(text)) {
      out = *v;
      return true;
    }
    error(path, node, "invalid value '" + text + "' (expected one of: " + enum_choices<E>() + ")");
    return false;
  }

  template <typename T>
  void field(const YAML::Node& parent, const std::string& base, std::string_view key, T& out,
             bool required = false) {
    const auto node = parent[std::string(key)];
    const auto path = join(base, key);
    if (!node) {
      if (required) error(path, parent, "missing required field '" + std::string(key) + "'");
      return;
    }
    if constexpr (std::is_enum_v<T>) {
      enumeration(node, path, out);
    } else {
      scalar(node, path, out);
    }
  }

  template <typename T>
  void list(const YAML::Node& parent, const std::string& base, std::string_view key,
            std::vector<T>& out, bool required = false) {
    const auto node = parent[std::string(key)];
    const auto path = join(base, key);
    if (!node) {
      if (required) error(path, parent, "missing required field '" + std::string(key) + "'");
      return;
    }
    if (!sequence(node, path)) return;
    out.clear();
    for (std::size_t i = 0; i < node.size(); ++i) {
      T v{};
      bool ok;
      if constexpr (std::is_enum_v<T>) ok = enumeration(node[i], at(path, i), v);
      else ok = scalar(node[i], at(path, i), v);
      if (ok) out.push_back(v);
    }
  }

  void number_map(const YAML::Node& parent, const std::string& base, std::string_view key,
                  std::map<std::string, double>& out) {
    const auto node = parent[std::string(key)];
    const auto path = join(base, key);
    if (!node) return;
    lines[path] = line_of(node);
    if (!node.IsMap()) {
      error(path, node, "expected a mapping");
      return;
    }
    out.clear();
    for (const auto& kv : node) {
      const auto k = kv.first.as<std::string>();
      double v = 0.0;
      if (scalar(kv.second, join(path, k), v)) out[k] = v;
    }
  }

  void stage_values(const YAML::Node& parent, const std::string& base, std::string_view key,
                    StageValues& out) {
    const auto node = parent[std::string(key)];
    const auto path = join(base, key);
    if (!node) return;
    if (!mapping(node, path, {"discover", "exploit", "escalate", "impact"})) return;
    field(node, path, "discover", out.discover);
    field(node, path, "exploit", out.exploit);
    field(node, path, "escalate", out.escalate);
    field(node, path, "impact", out.impact);
  }
};

inline void read_metadata(YamlReader& r, const YAML::Node& node, Metadata& m) {
  const std::string path = "metadata";
  if (!r.mapping(node, path, {"name", "description", "problem"})) return;
  r.field(node, path, "name", m.name, true);
  r.field(node, path, "description", m.description);
  const auto problem = node["problem"];
  if (!problem) {
    r.error("metadata.problem", node,
            "missing required block 'problem' (state the defensive objective, defender, "
            "adversary, and uncertainties)");
    return;
  }
  if (!r.mapping(problem, "metadata.problem", {"objective", "defender", "adversary", "uncertainties"})) return;
  r.field(problem, "metadata.problem", "objective", m.problem.objective, true);
  r.field(problem, "metadata.problem", "defender", m.problem.defender);
  r.field(problem, "metadata.problem", "adversary", m.problem.adversary);
  r.list(problem, "metadata.problem", "uncertainties", m.problem.uncertainties);
}

inline void read_topology(YamlReader& r, const YAML::Node& node, TopologyConfig& t) {
  const std::string path = "topology";
  if (!r.mapping(node, path, {"subnets", "adjacency", "entry_subnets", "services", "hosts"})) return;
  r.list(node, path, "subnets", t.subnets, true);
  r.list(node, path, "entry_subnets", t.entry_subnets);
  if (const auto adj = node["adjacency"]; adj && r.sequence(adj, "topology.adjacency")) {
    for (std::size_t i = 0; i < adj.size(); ++i) {
      const auto p = YamlReader::at("topology.adjacency", i);
      r.lines[p] = YamlReader::line_of(adj[i]);
      if (!adj[i].IsSequence() || adj[i].size() != 2) {
        r.error(p, adj[i], "expected a pair [subnet, subnet]");
        continue;
      }
      std::pair<std::string, std::string> link;
      if (r.scalar(adj[i][0], p, link.first) && r.scalar(adj[i][1], p, link.second)) {
        t.adjacency.push_back(link);
      }
    }
  }
  if (const auto svcs = node["services"]; svcs && r.sequence(svcs, "topology.services")) {
    for (std::size_t i = 0; i < svcs.size(); ++i) {
      const auto p = YamlReader::at("topology.services", i);
      ServiceConfig s;
      if (!r.mapping(svcs[i], p, {"id", "vulnerable"})) continue;
      r.field(svcs[i], p, "id", s.id, true);
      r.field(svcs[i], p, "vulnerable", s.vulnerable);
      t.services.push_back(s);
    }
  }
  const auto hosts = node["hosts"];
  if (!hosts) {
    r.error("topology.hosts", node, "missing required field 'hosts'");
    return;
  }
  if (!r.sequence(hosts, "topology.hosts")) return;
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    const auto p = YamlReader::at("topology.hosts", i);
    HostConfig h;
    if (!r.mapping(hosts[i], p, {"id", "subnet", "role", "services", "initial_compromise"})) continue;
    r.field(hosts[i], p, "id", h.id, true);
    r.field(hosts[i], p, "subnet", h.subnet, true);
    r.field(hosts[i], p, "role", h.role);
    r.list(hosts[i], p, "services", h.services);
    r.field(hosts[i], p, "initial_compromise", h.initial_compromise);
    t.hosts.push_back(h);
  }
}

inline void read_red(YamlReader& r, const YAML::Node& node, RedStrategyConfig& red) {
  const std::string path = "red";
  if (!r.mapping(node, path,
                 {"enabled", "mode", "targeting", "alt_targeting", "path", "start_time", "stage_delays",
                  "jitter", "success_probs", "switch_prob", "stealth"})) {
    return;
  }
  r.field(node, path, "enabled", red.enabled);
  r.field(node, path, "mode", red.mode);
  r.field(node, path, "targeting", red.targeting);
  r.field(node, path, "alt_targeting", red.alt_targeting);
  r.list(node, path, "path", red.path);
  r.field(node, path, "start_time", red.start_time);
  r.stage_values(node, path, "stage_delays", red.stage_delays);
  r.field(node, path, "jitter", red.jitter);
  r.stage_values(node, path, "success_probs", red.success_probs);
  r.field(node, path, "switch_prob", red.switch_prob);
  r.field(node, path, "stealth", red.stealth);
}

inline void read_green(YamlReader& r, const YAML::Node& node, GreenProfileConfig& g) {
  const std::string path = "green";
  if (!r.mapping(node, path, {"default_rate", "rates", "service_weights", "anomaly_prob"})) return;
  r.field(node, path, "default_rate", g.default_rate);
  r.number_map(node, path, "rates", g.rates);
  r.number_map(node, path, "service_weights", g.service_weights);
  r.field(node, path, "anomaly_prob", g.anomaly_prob);
}

inline void read_pomdp(YamlReader& r, const YAML::Node& node, PomdpSpec& p) {
  const std::string path = "pomdp";
  if (!r.mapping(node, path,
                 {"gamma", "horizon", "sequence", "interleaving", "sensor", "actions", "reward",
                  "lenient_mask"})) {
    return;
  }
  r.field(node, path, "gamma", p.gamma);
  r.field(node, path, "lenient_mask", p.lenient_mask);

  if (const auto h = node["horizon"]) {
    const std::string hp = "pomdp.horizon";
    HorizonKind kind = p.horizon.kind;
    if (h.IsMap() && h["kind"]) r.enumeration(h["kind"], hp + ".kind", kind);
    switch (kind) {
      case HorizonKind::fixed:
        if (r.mapping(h, hp, {"kind", "steps"})) r.field(h, hp, "steps", p.horizon.steps);
        break;
      case HorizonKind::terminal:
        if (r.mapping(h, hp, {"kind", "conditions", "max_time"})) {
          r.list(h, hp, "conditions", p.horizon.conditions, true);
          r.field(h, hp, "max_time", p.horizon.max_time);
        }
        break;
      case HorizonKind::continuing:
        if (r.mapping(h, hp, {"kind", "eval_window"})) r.field(h, hp, "eval_window", p.horizon.eval_window);
        break;
    }
    p.horizon.kind = kind;
  }
  if (const auto s = node["sequence"]; s && r.mapping(s, "pomdp.sequence", {"mode", "dt"})) {
    r.field(s, "pomdp.sequence", "mode", p.sequence.mode);
    r.field(s, "pomdp.sequence", "dt", p.sequence.dt);
  }
  if (const auto il = node["interleaving"];
      il && r.mapping(il, "pomdp.interleaving", {"mode", "order", "quantum"})) {
    r.field(il, "pomdp.interleaving", "mode", p.interleaving.mode);
    r.list(il, "pomdp.interleaving", "order", p.interleaving.order);
    r.field(il, "pomdp.interleaving", "quantum", p.interleaving.quantum);
  }
  if (const auto s = node["sensor"];
      s && r.mapping(s, "pomdp.sensor",
                     {"mode", "detection_prob", "false_positive_prob", "report_delay", "fields"})) {
    r.field(s, "pomdp.sensor", "mode", p.sensor.mode);
    r.field(s, "pomdp.sensor", "detection_prob", p.sensor.detection_prob);
    r.field(s, "pomdp.sensor", "false_positive_prob", p.sensor.false_positive_prob);
    r.field(s, "pomdp.sensor", "report_delay", p.sensor.report_delay);
    r.list(s, "pomdp.sensor", "fields", p.sensor.fields);
  }
  const auto acts = node["actions"];
  if (!acts) {
    r.error("pomdp.actions", node, "missing required field 'actions'");
  } else if (r.sequence(acts, "pomdp.actions")) {
    for (std::size_t i = 0; i < acts.size(); ++i) {
      const auto ap = YamlReader::at("pomdp.actions", i);
      ActionSpec a;
      if (!r.mapping(acts[i], ap,
                     {"name", "targets", "duration", "success_prob", "cost", "preconditions"})) {
        continue;
      }
      r.field(acts[i], ap, "name", a.kind, true);
      r.list(acts[i], ap, "targets", a.targets);
      r.field(acts[i], ap, "duration", a.duration);
      r.field(acts[i], ap, "success_prob", a.success_prob);
      if (acts[i]["cost"]) {
        double c = 0.0;
        if (r.scalar(acts[i]["cost"], ap + ".cost", c)) a.cost = c;
      }
      if (acts[i]["preconditions"]) {
        std::vector<Precondition> pre;
        r.list(acts[i], ap, "preconditions", pre);
        a.preconditions = pre;
      }
      p.actions.push_back(a);
    }
  }
  if (const auto rw = node["reward"]) {
    const std::string rp = "pomdp.reward";
    RewardKind kind = p.reward.kind;
    if (rw.IsMap() && rw["kind"]) r.enumeration(rw["kind"], rp + ".kind", kind);
    p.reward.kind = kind;
    switch (kind) {
      case RewardKind::dense_default:
        if (r.mapping(rw, rp, {"kind", "compromise_penalty", "restore_cost", "pass_bonus", "role_weights"})) {
          r.field(rw, rp, "compromise_penalty", p.reward.compromise_penalty);
          r.field(rw, rp, "restore_cost", p.reward.restore_cost);
          r.field(rw, rp, "pass_bonus", p.reward.pass_bonus);
          std::map<std::string, double> weights;
          r.number_map(rw, rp, "role_weights", weights);
          for (const auto& [name, w] : weights) {
            if (auto role = enum_from_string<Role>(name)) {
              p.reward.role_weights[*role] = w;
            } else {
              r.error(rp + ".role_weights." + name, rw["role_weights"], "unknown role '" + name + "'");
            }
          }
        }
        break;
      case RewardKind::sparse:
        if (r.mapping(rw, rp, {"kind", "terminal_penalty"})) {
          r.field(rw, rp, "terminal_penalty", p.reward.terminal_penalty);
        }
        break;
      case RewardKind::optimal_stopping:
        if (r.mapping(rw, rp, {"kind", "false_stop_cost", "missed_intrusion_cost"})) {
          r.field(rw, rp, "false_stop_cost", p.reward.false_stop_cost);
          r.field(rw, rp, "missed_intrusion_cost", p.reward.missed_intrusion_cost);
        }
        break;
    }
  }
}

}  // namespace detail

/// Parses and validates scenario text. Throws ScenarioError carrying every
/// problem found, each with its field path and source line.
inline ScenarioConfig parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError({{"", e.msg, e.mark.line + 1}});
  }
  detail::YamlReader r;
  ScenarioConfig cfg;
  if (!root || !root.IsMap()) throw ScenarioError({{"", "scenario must be a YAML mapping", 1}});

  if (!root["schema_version"]) {
    r.error("schema_version", root, "missing required field 'schema_version'");
  } else if (r.scalar(root["schema_version"], "schema_version", cfg.schema_version) &&
             cfg.schema_version != kSchemaVersion) {
    // Nothing else can be trusted under a different schema.
    r.error("schema_version", root["schema_version"],
            "unsupported schema version " + std::to_string(cfg.schema_version) + " (this build reads version " +
                std::to_string(kSchemaVersion) + ")");
    throw ScenarioError(std::move(r.issues));
  }
  r.mapping(root, "", {"schema_version", "metadata", "topology", "red", "green", "pomdp", "seed"});
  r.field(root, "", "seed", cfg.seed);
  if (const auto m = root["metadata"]) {
    detail::read_metadata(r, m, cfg.metadata);
  } else {
    r.error("metadata", root, "missing required block 'metadata' (with its 'problem' block)");
  }
  if (const auto t = root["topology"]) {
    detail::read_topology(r, t, cfg.topology);
  } else {
    r.error("topology", root, "missing required block 'topology'");
  }
  if (const auto red = root["red"]) detail::read_red(r, red, cfg.red);
  if (const auto g = root["green"]) detail::read_green(r, g, cfg.green);
  if (const auto p = root["pomdp"]) {
    detail::read_pomdp(r, p, cfg.pomdp);
  } else {
    r.error("pomdp", root, "missing required block 'pomdp'");
  }

  if (r.issues.empty()) {
    for (auto issue : validate_config(cfg)) {
      issue.line = r.line_for(issue.path);
      r.issues.push_back(std::move(issue));
    }
  }
  if (!r.issues.empty()) throw ScenarioError(std::move(r.issues));
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

namespace detail {

inline void emit_number(YAML::Emitter& out, std::string_view key, double v) {
  out << YAML::Key << std::string(key) << YAML::Value << format_double(v);
}

template <typename E>
void emit_enum(YAML::Emitter& out, std::string_view key, E v) {
  out << YAML::Key << std::string(key) << YAML::Value << std::string(to_string(v));
}

inline void emit_strings(YAML::Emitter& out, std::string_view key, const std::vector<std::string>& v) {
  out << YAML::Key << std::string(key) << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto& s : v) out << s;
  out << YAML::EndSeq;
}

template <typename E>
void emit_enums(YAML::Emitter& out, std::string_view key, const std::vector<E>& v) {
  out << YAML::Key << std::string(key) << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto e : v) out << std::string(to_string(e));
  out << YAML::EndSeq;
}

inline void emit_stages(YAML::Emitter& out, std::string_view key, const StageValues& s) {
  out << YAML::Key << std::string(key) << YAML::Value << YAML::BeginMap;
  emit_number(out, "discover", s.discover);
  emit_number(out, "exploit", s.exploit);
  emit_number(out, "escalate", s.escalate);
  emit_number(out, "impact", s.impact);
  out << YAML::EndMap;
}

inline void emit_number_map(YAML::Emitter& out, std::string_view key, const std::map<std::string, double>& m) {
  out << YAML::Key << std::string(key) << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : m) emit_number(out, k, v);
  out << YAML::EndMap;
}

}  // namespace detail

/// Canonical YAML text of `cfg`; every field is written explicitly.
inline std::string serialize_scenario(const ScenarioConfig& cfg) {
  using namespace detail;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << cfg.schema_version;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;

  out << YAML::Key << "metadata" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << cfg.metadata.name;
  out << YAML::Key << "description" << YAML::Value << cfg.metadata.description;
  out << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "objective" << YAML::Value << cfg.metadata.problem.objective;
  out << YAML::Key << "defender" << YAML::Value << cfg.metadata.problem.defender;
  out << YAML::Key << "adversary" << YAML::Value << cfg.metadata.problem.adversary;
  emit_strings(out, "uncertainties", cfg.metadata.problem.uncertainties);
  out << YAML::EndMap << YAML::EndMap;

  const auto& t = cfg.topology;
  out << YAML::Key << "topology" << YAML::Value << YAML::BeginMap;
  emit_strings(out, "subnets", t.subnets);
  out << YAML::Key << "adjacency" << YAML::Value << YAML::BeginSeq;
  for (const auto& [a, b] : t.adjacency) out << YAML::Flow << YAML::BeginSeq << a << b << YAML::EndSeq;
  out << YAML::EndSeq;
  emit_strings(out, "entry_subnets", t.entry_subnets);
  out << YAML::Key << "services" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : t.services) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "id" << YAML::Value << s.id << YAML::Key
        << "vulnerable" << YAML::Value << s.vulnerable << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "hosts" << YAML::Value << YAML::BeginSeq;
  for (const auto& h : t.hosts) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << h.id;
    out << YAML::Key << "subnet" << YAML::Value << h.subnet;
    emit_enum(out, "role", h.role);
    emit_strings(out, "services", h.services);
    emit_enum(out, "initial_compromise", h.initial_compromise);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;

  const auto& red = cfg.red;
  out << YAML::Key << "red" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << red.enabled;
  emit_enum(out, "mode", red.mode);
  emit_enum(out, "targeting", red.targeting);
  emit_enum(out, "alt_targeting", red.alt_targeting);
  emit_strings(out, "path", red.path);
  emit_number(out, "start_time", red.start_time);
  emit_stages(out, "stage_delays", red.stage_delays);
  emit_number(out, "jitter", red.jitter);
  emit_stages(out, "success_probs", red.success_probs);
  emit_number(out, "switch_prob", red.switch_prob);
  emit_number(out, "stealth", red.stealth);
  out << YAML::EndMap;

  const auto& g = cfg.green;
  out << YAML::Key << "green" << YAML::Value << YAML::BeginMap;
  emit_number(out, "default_rate", g.default_rate);
  emit_number_map(out, "rates", g.rates);
  emit_number_map(out, "service_weights", g.service_weights);
  emit_number(out, "anomaly_prob", g.anomaly_prob);
  out << YAML::EndMap;

  const auto& p = cfg.pomdp;
  out << YAML::Key << "pomdp" << YAML::Value << YAML::BeginMap;
  emit_number(out, "gamma", p.gamma);
  out << YAML::Key << "lenient_mask" << YAML::Value << p.lenient_mask;
  out << YAML::Key << "horizon" << YAML::Value << YAML::BeginMap;
  emit_enum(out, "kind", p.horizon.kind);
  switch (p.horizon.kind) {
    case HorizonKind::fixed: out << YAML::Key << "steps" << YAML::Value << p.horizon.steps; break;
    case HorizonKind::terminal:
      emit_enums(out, "conditions", p.horizon.conditions);
      emit_number(out, "max_time", p.horizon.max_time);
      break;
    case HorizonKind::continuing: out << YAML::Key << "eval_window" << YAML::Value << p.horizon.eval_window; break;
  }
  out << YAML::EndMap;
  out << YAML::Key << "sequence" << YAML::Value << YAML::BeginMap;
  emit_enum(out, "mode", p.sequence.mode);
  emit_number(out, "dt", p.sequence.dt);
  out << YAML::EndMap;
  out << YAML::Key << "interleaving" << YAML::Value << YAML::BeginMap;
  emit_enum(out, "mode", p.interleaving.mode);
  emit_enums(out, "order", p.interleaving.order);
  emit_number(out, "quantum", p.interleaving.quantum);
  out << YAML::EndMap;
  out << YAML::Key << "sensor" << YAML::Value << YAML::BeginMap;
  emit_enum(out, "mode", p.sensor.mode);
  emit_number(out, "detection_prob", p.sensor.detection_prob);
  emit_number(out, "false_positive_prob", p.sensor.false_positive_prob);
  emit_number(out, "report_delay", p.sensor.report_delay);
  emit_enums(out, "fields", p.sensor.fields);
  out << YAML::EndMap;
  out << YAML::Key << "actions" << YAML::Value << YAML::BeginSeq;
  for (const auto& a : p.actions) {
    out << YAML::BeginMap;
    emit_enum(out, "name", a.kind);
    emit_strings(out, "targets", a.targets);
    emit_number(out, "duration", a.duration);
    emit_number(out, "success_prob", a.success_prob);
    if (a.cost) emit_number(out, "cost", *a.cost);
    if (a.preconditions) emit_enums(out, "preconditions", *a.preconditions);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "reward" << YAML::Value << YAML::BeginMap;
  emit_enum(out, "kind", p.reward.kind);
  switch (p.reward.kind) {
    case RewardKind::dense_default: {
      emit_number(out, "compromise_penalty", p.reward.compromise_penalty);
      emit_number(out, "restore_cost", p.reward.restore_cost);
      emit_number(out, "pass_bonus", p.reward.pass_bonus);
      std::map<std::string, double> weights;
      for (const auto& [role, w] : p.reward.role_weights) weights[std::string(to_string(role))] = w;
      emit_number_map(out, "role_weights", weights);
      break;
    }
    case RewardKind::sparse: emit_number(out, "terminal_penalty", p.reward.terminal_penalty); break;
    case RewardKind::optimal_stopping:
      emit_number(out, "false_stop_cost", p.reward.false_stop_cost);
      emit_number(out, "missed_intrusion_cost", p.reward.missed_intrusion_cost);
      break;
  }
  out << YAML::EndMap << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

/// Stable 16-hex-digit hash of the canonical serialization.
inline std::string scenario_hash(const ScenarioConfig& cfg) {
  static constexpr char kHex[] = "0123456789abcdef";
  auto h = fnv1a64(serialize_scenario(cfg));
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

}  // namespace acdsim
