#pragma once

// Newline-delimited JSON control protocol. One request line in, one response
// line out; errors answer {"error": ...} and keep the session alive.
//
//   {"op":"hello"}             -> {"ok":true,"scenario":..,"action_names":[..],"obs_layout":{..}}
//   {"op":"reset","seed":n}    -> {"obs":[..],"mask":[..]}
//   {"op":"step","action":i}   -> {"obs":[..],"reward":x,"terminated":b,"truncated":b,"mask":[..],"info":{..}}
//   {"op":"close"}             -> {"ok":true}
//
// Responses use a fixed field order and shortest round-trip number text, so
// a fixed request sequence always yields byte-identical output.

#include <nlohmann/json.hpp>

#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include "acdsim/taskmodel.hpp"

namespace acdsim {

using Json = nlohmann::ordered_json;

/// Compact JSON text with doubles in shortest round-trip form.
inline std::string canonical_dump(const Json& j) {
  switch (j.type()) {
    case Json::value_t::object: {
      std::string out = "{";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(k).dump();
        out += ':';
        out += canonical_dump(v);
      }
      return out + "}";
    }
    case Json::value_t::array: {
      std::string out = "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        out += canonical_dump(j[i]);
      }
      return out + "]";
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) return "null";
      return format_double(v);
    }
    default: return j.dump();
  }
}

struct ProtocolOptions {
  // The omniscient sensor exposes ground truth; only test harnesses may
  // serve it.
  bool test_profile = false;
};

class ProtocolSession {
 public:
  explicit ProtocolSession(const ScenarioConfig& config, ProtocolOptions options = {})
      : env_(check(config, options)) {}

  bool closed() const noexcept { return closed_; }
  Env& env() noexcept { return env_; }

  /// Handles one request line and returns the response line (no newline).
  std::string handle(const std::string& line) {
    Json req;
    try {
      req = Json::parse(line);
    } catch (const Json::parse_error&) {
      return error("malformed request: not valid JSON");
    }
    if (!req.is_object()) return error("malformed request: expected a JSON object");
    if (!req.contains("op") || !req["op"].is_string()) return error("malformed request: missing op");
    const auto op = req["op"].get<std::string>();
    try {
      if (op == "hello") return hello();
      if (op == "reset") return reset(req);
      if (op == "step") return step(req);
      if (op == "close") {
        closed_ = true;
        return canonical_dump(Json{{"ok", true}});
      }
    } catch (const InvalidAction& e) {
      return error(e.what());
    } catch (const std::logic_error& e) {
      return error(e.what());
    }
    return error("unknown op: " + op);
  }

 private:
  static ScenarioConfig check(const ScenarioConfig& config, const ProtocolOptions& options) {
    if (config.pomdp.sensor.mode == SensorMode::omniscient_oracle && !options.test_profile) {
      throw ConfigError("omniscient_oracle sensor is only served under the test profile");
    }
    return config;
  }

  static std::string error(const std::string& message) { return canonical_dump(Json{{"error", message}}); }

  static Json mask_json(const std::vector<bool>& mask) {
    Json m = Json::array();
    for (bool b : mask) m.push_back(b);
    return m;
  }

  std::string hello() const {
    Json j;
    j["ok"] = true;
    j["scenario"] = env_.config().metadata.name;
    Json names = Json::array();
    for (const auto& a : env_.actions()) names.push_back(a.name);
    j["action_names"] = names;
    Json layout = Json::object();
    for (std::size_t i = 0; i < env_.layout().size(); ++i) layout[env_.layout()[i]] = i;
    j["obs_layout"] = layout;
    return canonical_dump(j);
  }

  std::string reset(const Json& req) {
    std::uint64_t seed = env_.config().seed;
    if (req.contains("seed")) {
      if (!req["seed"].is_number_unsigned() && !(req["seed"].is_number_integer() && req["seed"].get<std::int64_t>() >= 0)) {
        return error("malformed request: seed must be a non-negative integer");
      }
      seed = req["seed"].get<std::uint64_t>();
    }
    const auto obs = env_.reset(seed);
    Json j;
    j["obs"] = obs.flat;
    j["mask"] = mask_json(env_.legal_action_mask());
    return canonical_dump(j);
  }

  std::string step(const Json& req) {
    if (!req.contains("action") || !req["action"].is_number_integer()) {
      return error("malformed request: action must be an integer");
    }
    if (!env_.started()) return error("step before reset");
    const auto raw = req["action"].get<std::int64_t>();
    if (raw < 0 || static_cast<std::uint64_t>(raw) >= env_.actions().size()) return error("invalid action id");
    const auto r = env_.step(static_cast<std::size_t>(raw));
    Json j;
    j["obs"] = r.obs.flat;
    j["reward"] = r.reward;
    j["terminated"] = r.terminated;
    j["truncated"] = r.truncated;
    j["mask"] = mask_json(env_.legal_action_mask());
    j["info"] = {{"step", r.info.step_index},
                 {"clock", r.info.window_end},
                 {"applied_events", r.info.applied_events},
                 {"void_events", r.info.void_events},
                 {"feedback", std::string(to_string(r.info.feedback))},
                 {"masked_action", r.info.masked_action}};
    return canonical_dump(j);
  }

  Env env_;
  bool closed_ = false;
};

/// Runs a session over a line stream until close or end of input. Returns
/// the number of requests handled.
inline std::size_t serve_stream(const ScenarioConfig& config, std::istream& in, std::ostream& out,
                                ProtocolOptions options = {}) {
  ProtocolSession session(config, options);
  std::string line;
  std::size_t n = 0;
  while (!session.closed() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << session.handle(line) << '\n';
    out.flush();
    ++n;
  }
  return n;
}

}  // namespace acdsim
