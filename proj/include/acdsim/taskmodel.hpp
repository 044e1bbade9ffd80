#pragma once

// The agent-facing POMDP layer over the network simulation: step sequencing,
// sensor-derived observations, masked duration-bearing actions, and rewards.

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "acdsim/actors.hpp"
#include "acdsim/config.hpp"
#include "acdsim/netsim.hpp"
#include "acdsim/random.hpp"
#include "acdsim/validate.hpp"

namespace acdsim {

enum class ActionFeedback { none, in_progress, succeeded, failed };

template <>
struct EnumNames<ActionFeedback> {
  static constexpr auto names =
      std::to_array<std::string_view>({"none", "in_progress", "succeeded", "failed"});
  static constexpr std::string_view type = "ActionFeedback";
};

/// Masked or out-of-range action under the strict contract.
class InvalidAction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One concrete blue action: a spec bound to a target host.
struct ActionInstance {
  std::string name;  // "pass", "scan(ws)", ...
  ActionKind kind = ActionKind::pass;
  std::optional<std::size_t> host;
  std::size_t spec_index = 0;
  double duration = 0.0;
  double success_prob = 1.0;
  double cost = 0.0;  // dense reward term; pass carries the pass bonus
  std::vector<Precondition> preconditions;
};

/// Expands action specs into instances: each spec in config order, each
/// target in host declaration order.
inline std::vector<ActionInstance> expand_actions(const ScenarioConfig& cfg) {
  std::vector<ActionInstance> out;
  const auto& hosts = cfg.topology.hosts;
  const auto& reward = cfg.pomdp.reward;
  for (std::size_t si = 0; si < cfg.pomdp.actions.size(); ++si) {
    const auto& spec = cfg.pomdp.actions[si];
    ActionInstance base;
    base.kind = spec.kind;
    base.spec_index = si;
    base.duration = spec.duration;
    base.success_prob = spec.success_prob;
    base.preconditions = spec.preconditions.value_or(default_preconditions(spec.kind));
    if (spec.kind == ActionKind::pass) {
      base.cost = reward.pass_bonus;
    } else if (spec.kind == ActionKind::restore) {
      base.cost = spec.cost.value_or(reward.restore_cost);
    } else {
      base.cost = spec.cost.value_or(0.0);
    }
    if (spec.kind == ActionKind::pass || spec.kind == ActionKind::stop) {
      base.name = std::string(to_string(spec.kind));
      out.push_back(std::move(base));
      continue;
    }
    for (std::size_t h = 0; h < hosts.size(); ++h) {
      if (!spec.targets.empty() &&
          std::find(spec.targets.begin(), spec.targets.end(), hosts[h].id) == spec.targets.end()) {
        continue;
      }
      ActionInstance a = base;
      a.host = h;
      a.name = std::string(to_string(spec.kind)) + "(" + hosts[h].id + ")";
      out.push_back(std::move(a));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// observations

struct NodeRecord {
  HostId host_id;
  std::array<double, 3> role{};  // one-hot over Role
  bool detected_compromise = false;
  double alert_count = 0.0;
  bool quarantined = false;
  // Ground truth, populated only by the omniscient oracle sensor.
  std::optional<int> compromise_level;
  std::optional<int> red_stage;
  bool operator==(const NodeRecord&) const = default;
};

struct Observation {
  std::vector<double> flat;
  std::vector<NodeRecord> factored;
  std::size_t step_index = 0;
  ActionFeedback last_action_feedback = ActionFeedback::none;
  bool operator==(const Observation&) const = default;
};

inline std::size_t feature_width(Feature f) { return f == Feature::role ? 3 : 1; }

/// Exposed fields in canonical (enum) order.
inline std::vector<Feature> canonical_fields(const std::vector<Feature>& fields) {
  std::vector<Feature> out;
  for (std::size_t i = 0; i < EnumNames<Feature>::names.size(); ++i) {
    const auto f = static_cast<Feature>(i);
    if (std::find(fields.begin(), fields.end(), f) != fields.end()) out.push_back(f);
  }
  return out;
}

/// Flattens records host by host, fields in canonical order.
inline std::vector<double> flatten(std::span<const NodeRecord> records,
                                   const std::vector<Feature>& fields) {
  const auto order = canonical_fields(fields);
  std::vector<double> flat;
  for (const auto& r : records) {
    for (auto f : order) {
      switch (f) {
        case Feature::role: flat.insert(flat.end(), r.role.begin(), r.role.end()); break;
        case Feature::detected_compromise: flat.push_back(r.detected_compromise ? 1.0 : 0.0); break;
        case Feature::alert_count: flat.push_back(r.alert_count); break;
        case Feature::quarantined: flat.push_back(r.quarantined ? 1.0 : 0.0); break;
        case Feature::compromise_level: flat.push_back(r.compromise_level.value_or(0)); break;
        case Feature::red_stage: flat.push_back(r.red_stage.value_or(0)); break;
      }
    }
  }
  return flat;
}

/// Flat-vector feature names, index = position.
inline std::vector<std::string> observation_layout(const ScenarioConfig& cfg) {
  const auto order = canonical_fields(cfg.pomdp.sensor.fields);
  std::vector<std::string> names;
  for (const auto& h : cfg.topology.hosts) {
    for (auto f : order) {
      if (f == Feature::role) {
        for (auto r : EnumNames<Role>::names) names.push_back(h.id + ".role." + std::string(r));
      } else {
        names.push_back(h.id + "." + std::string(to_string(f)));
      }
    }
  }
  return names;
}

/// Stable text key of a flat observation, used for tabular learning.
inline std::string observation_key(std::span<const double> flat) {
  std::string key;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (i) key += ',';
    key += format_double(flat[i]);
  }
  return key;
}

// ---------------------------------------------------------------------------
// rewards

/// Reward for one step, assessed on the state at the end of the window.
///   dense_default:    action term (pass bonus or action cost) plus the
///                     compromise penalty per compromised host (role-weighted)
///   sparse:           terminal_penalty on a terminal transition with an
///                     impacted critical host, else 0
///   optimal_stopping: stop on a clean network costs false_stop_cost; each
///                     continue while any host is compromised costs
///                     missed_intrusion_cost
inline double compute_reward(const TruthRecord& after, const ActionInstance& action,
                             const RewardConfig& cfg, bool terminated) {
  switch (cfg.kind) {
    case RewardKind::dense_default: {
      double r = action.cost;
      for (const auto& h : after.hosts) {
        if (h.compromise == Compromise::none) continue;
        auto it = cfg.role_weights.find(h.role);
        r += cfg.compromise_penalty * (it == cfg.role_weights.end() ? 1.0 : it->second);
      }
      return r;
    }
    case RewardKind::sparse:
      return terminated && after.critical_impacted() ? cfg.terminal_penalty : 0.0;
    case RewardKind::optimal_stopping: {
      const bool intrusion = after.compromised_count() > 0;
      if (action.kind == ActionKind::stop) return intrusion ? 0.0 : cfg.false_stop_cost;
      return intrusion ? cfg.missed_intrusion_cost : 0.0;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// environment

struct StepInfo {
  std::size_t step_index = 0;
  double window_start = 0.0;
  double window_end = 0.0;
  std::size_t applied_events = 0;
  std::size_t void_events = 0;
  bool masked_action = false;
  ActionFeedback feedback = ActionFeedback::none;
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  StepInfo info;
};

struct EnvOptions {
  // Keep the full applied-event trace of the episode (needed for metrics and
  // golden traces; learners can turn it off).
  bool record_trace = true;
};

/// Sensor-side belief buffers. Fed only by applied events, never by truth.
struct SensorState {
  struct PendingAlert {
    double deliver_at = 0.0;
    std::size_t host = 0;
    bool compromise_indicator = false;
  };
  std::vector<bool> detected;
  std::vector<double> alert_count;
  std::vector<bool> quarantined;
  std::vector<PendingAlert> pending;
};

/// A single episode-at-a-time environment instance. Single caller; copies
/// are independent.
class Env : private EventHook {
 public:
  explicit Env(ScenarioConfig config, EnvOptions options = {})
      : config_(std::make_shared<const ScenarioConfig>(std::move(config))), options_(options) {
    if (auto issues = validate_config(*config_); !issues.empty()) throw ScenarioError(std::move(issues));
    actions_ = expand_actions(*config_);
    for (std::size_t i = 0; i < actions_.size(); ++i) {
      if (actions_[i].kind == ActionKind::pass) pass_index_ = i;
    }
    layout_ = observation_layout(*config_);
  }

  Env(const Env& other) : EventHook(other) { *this = other; }
  Env& operator=(const Env& other) {
    if (this == &other) return *this;
    config_ = other.config_;
    options_ = other.options_;
    actions_ = other.actions_;
    layout_ = other.layout_;
    pass_index_ = other.pass_index_;
    net_ = other.net_;
    campaign_ = other.campaign_;
    sensor_ = other.sensor_;
    step_ = other.step_;
    started_ = other.started_;
    done_ = other.done_;
    in_progress_ = other.in_progress_;
    completed_in_window_ = other.completed_in_window_;
    feedback_ = other.feedback_;
    trace_ = other.trace_;
    window_events_ = other.window_events_;
    obs_ = other.obs_;
    hook_ = nullptr;  // hooks are per-instance
    net_.rng.set_hook(nullptr);
    return *this;
  }

  const ScenarioConfig& config() const noexcept { return *config_; }
  const std::vector<ActionInstance>& actions() const noexcept { return actions_; }
  std::size_t pass_action() const noexcept { return pass_index_; }
  const std::vector<std::string>& layout() const noexcept { return layout_; }
  std::size_t step_index() const noexcept { return step_; }
  bool episode_done() const noexcept { return done_; }
  bool started() const noexcept { return started_; }

  const NetworkState& network() const noexcept { return net_; }
  const RedCampaignState& campaign() const noexcept { return campaign_; }
  TruthRecord truth() const { return snapshot_truth(net_); }
  const std::vector<AppliedEvent>& trace() const noexcept { return trace_; }
  const std::vector<AppliedEvent>& window_events() const noexcept { return window_events_; }
  const Observation& observation() const noexcept { return obs_; }

  void set_draw_hook(DrawHook* hook) {
    hook_ = hook;
    net_.rng.set_hook(hook);
  }

  /// Starts a fresh episode from `seed`.
  Observation reset(std::uint64_t seed) {
    net_ = build_network(*config_, seed);
    net_.rng.set_hook(hook_);
    campaign_ = make_campaign(*config_);
    const auto n = net_.hosts.size();
    sensor_ = SensorState{};
    sensor_.detected.assign(n, false);
    sensor_.alert_count.assign(n, 0.0);
    sensor_.quarantined.assign(n, false);
    step_ = 0;
    started_ = true;
    done_ = false;
    in_progress_.reset();
    completed_in_window_ = false;
    feedback_ = ActionFeedback::none;
    trace_.clear();
    window_events_.clear();
    obs_ = build_observation();
    return obs_;
  }

  /// True for each action whose preconditions hold on observation-visible
  /// facts. pass is always legal; everything else waits while a blue action
  /// is in progress.
  std::vector<bool> legal_action_mask() const {
    std::vector<bool> mask(actions_.size(), false);
    for (std::size_t i = 0; i < actions_.size(); ++i) mask[i] = is_legal(i);
    return mask;
  }

  bool is_legal(std::size_t i) const {
    const auto& a = actions_.at(i);
    if (a.kind == ActionKind::pass) return true;
    if (!started_ || in_progress_) return false;
    if (!a.host) return true;
    const auto& rec = obs_.factored[*a.host];
    for (auto p : a.preconditions) {
      switch (p) {
        case Precondition::detected:
          if (!rec.detected_compromise) return false;
          break;
        case Precondition::not_detected:
          if (rec.detected_compromise) return false;
          break;
        case Precondition::quarantined:
          if (!rec.quarantined) return false;
          break;
        case Precondition::not_quarantined:
          if (rec.quarantined) return false;
          break;
      }
    }
    return true;
  }

  std::vector<double> encode_flat() const { return obs_.flat; }
  std::vector<NodeRecord> encode_factored() const { return obs_.factored; }

  /// Advances one decision step.
  ///
  /// fixed_tick windows last dt; action_duration windows last until the
  /// chosen action completes (pass uses its own duration). stop ends the
  /// episode without advancing time.
  StepResult step(std::size_t action_id) {
    if (!started_) throw std::logic_error("step before reset");
    if (done_) throw std::logic_error("episode finished; reset required");
    if (action_id >= actions_.size()) throw InvalidAction("invalid action id");

    StepResult result;
    std::size_t effective = action_id;
    if (!is_legal(action_id)) {
      if (!config_->pomdp.lenient_mask) throw InvalidAction("masked action: " + actions_[action_id].name);
      effective = pass_index_;
      result.info.masked_action = true;
    }
    const auto& act = actions_[effective];
    const auto& seq = config_->pomdp.sequence;

    begin_window(net_);
    window_events_.clear();
    completed_in_window_ = false;
    const double t0 = net_.clock;

    double t_end = t0;
    if (act.kind != ActionKind::stop) {
      std::optional<double> completion;
      if (act.kind != ActionKind::pass) completion = resolve_action(effective);
      if (seq.mode == SequenceMode::fixed_tick) {
        t_end = t0 + seq.dt;
      } else {
        t_end = completion ? *completion : t0 + act.duration;
      }
    }
    advance_until(net_, t_end, this);
    end_window(net_);
    deliver_alerts(t_end);

    ++step_;
    if (completed_in_window_) {
      // feedback_ was set by the completion event
    } else if (in_progress_) {
      feedback_ = ActionFeedback::in_progress;
    } else {
      feedback_ = ActionFeedback::none;
    }
    obs_ = build_observation();

    const auto truth = snapshot_truth(net_);
    const auto& horizon = config_->pomdp.horizon;
    bool terminated = act.kind == ActionKind::stop;
    if (horizon.kind == HorizonKind::terminal) {
      for (auto c : horizon.conditions) {
        switch (c) {
          case TerminalCondition::critical_impacted: terminated |= truth.critical_impacted(); break;
          case TerminalCondition::all_compromised:
            terminated |= truth.compromised_count() == truth.hosts.size();
            break;
          case TerminalCondition::max_time: terminated |= net_.clock >= horizon.max_time; break;
          case TerminalCondition::stop: break;
        }
      }
    }
    const bool truncated =
        horizon.kind == HorizonKind::fixed && step_ >= static_cast<std::size_t>(horizon.steps);
    done_ = terminated || truncated;

    result.obs = obs_;
    result.reward = compute_reward(truth, act, config_->pomdp.reward, terminated);
    result.terminated = terminated;
    result.truncated = truncated;
    result.info.step_index = step_;
    result.info.window_start = t0;
    result.info.window_end = t_end;
    result.info.applied_events = window_events_.size();
    for (const auto& a : window_events_) {
      if (a.status == EventStatus::void_) ++result.info.void_events;
    }
    result.info.feedback = feedback_;
    return result;
  }

  /// Draws the action's success on the blue stream and schedules its
  /// action_complete event at now + duration. Returns the completion time.
  double resolve_action(std::size_t action_id) {
    const auto& a = actions_.at(action_id);
    const bool success = net_.rng.bernoulli(streams::kBlue, a.success_prob);
    Event e;
    e.timestamp = net_.clock + a.duration;
    e.source = Actor::blue;
    e.kind = EventKind::action_complete;
    if (a.host) e.subject = net_.hosts[*a.host].id;
    e.payload.action = a.kind;
    e.payload.action_index = static_cast<int>(action_id);
    e.payload.success = success;
    schedule_event(net_, std::move(e));
    in_progress_ = action_id;
    return net_.clock + a.duration;
  }

  /// Canonical text of the full dynamic state, with times relative to the
  /// clock. Excludes RNG state, step count, and per-window accounting.
  std::string state_key() const {
    std::string k = "h:";
    for (const auto& h : net_.hosts) {
      k += std::to_string(static_cast<int>(h.compromise));
      k += h.quarantined ? 'q' : '-';
      k += h.impacted ? 'i' : '-';
      k += ';';
    }
    k += "|r:";
    for (auto s : campaign_.stage) k += std::to_string(static_cast<int>(s));
    k += ',' + std::to_string(static_cast<int>(campaign_.mode));
    // Only random targeting keeps a sticky target between wake-ups.
    if (campaign_.mode == Targeting::random_reachable && campaign_.target) {
      k += ',' + std::to_string(*campaign_.target);
    }
    k += "|s:";
    // Alert counts feed nothing but their own field, so they only count as
    // state when exposed.
    const auto& fields = config_->pomdp.sensor.fields;
    const bool counts = std::find(fields.begin(), fields.end(), Feature::alert_count) != fields.end();
    for (std::size_t i = 0; i < sensor_.detected.size(); ++i) {
      k += sensor_.detected[i] ? '1' : '0';
      k += sensor_.quarantined[i] ? 'q' : '-';
      if (counts) k += format_double(sensor_.alert_count[i]);
      k += ';';
    }
    for (const auto& p : sensor_.pending) {
      k += 'p' + format_double(p.deliver_at - net_.clock) + '@' + std::to_string(p.host) +
           (p.compromise_indicator ? "!" : "") + ';';
    }
    k += "|c:";
    net_.calendar.for_each([&](const Event& e) {
      k += format_double(e.timestamp - net_.clock);
      k += ',' + std::string(to_string(e.source)) + ',' + std::string(to_string(e.kind)) + ',' +
           e.subject + ',' + e.peer + ',' + format_double(e.payload.success_prob) +
           (e.payload.artifact_suppressed ? "s" : "") + (e.payload.anomalous ? "a" : "") + ',' +
           std::to_string(e.payload.action_index) + (e.payload.success ? "+" : "") + ';';
    });
    k += "|b:" + (in_progress_ ? std::to_string(*in_progress_) : std::string("-"));
    return k;
  }

 private:
  void on_applied(NetworkState& state, const AppliedEvent& applied) override {
    window_events_.push_back(applied);
    if (options_.record_trace) trace_.push_back(applied);
    const auto& e = applied.event;

    if (e.kind == EventKind::service_tick) {
      if (e.source == Actor::red) {
        auto emission = red_step(campaign_, *config_, state, e.timestamp, state.rng);
        schedule_emission(state, Actor::red, std::move(emission));
      } else if (e.source == Actor::green) {
        auto emission = green_step(*config_, state, e.timestamp, state.rng);
        schedule_emission(state, Actor::green, std::move(emission));
      }
      return;
    }
    observe_for_red(campaign_, state, applied);
    if (e.source == Actor::blue && e.kind == EventKind::action_complete) {
      in_progress_.reset();
      completed_in_window_ = true;
      feedback_ = e.payload.success ? ActionFeedback::succeeded : ActionFeedback::failed;
    }
    sense(applied);
  }

  void schedule_emission(NetworkState& state, Actor actor, ActorEmission emission) {
    for (auto& ev : emission.events) schedule_event(state, std::move(ev));
    if (!std::isnan(emission.next_wake)) schedule_wakeup(state, *config_, actor, emission.next_wake);
  }

  /// Converts one applied event into delayed alerts or blue feedback.
  void sense(const AppliedEvent& applied) {
    const auto& sc = config_->pomdp.sensor;
    const auto& e = applied.event;
    if (e.subject.empty() || applied.status == EventStatus::void_) return;
    const auto h = net_.index_of(e.subject);
    auto& rng = net_.rng;

    if (e.source == Actor::red) {
      if (e.payload.artifact_suppressed) return;
      if (!rng.bernoulli(streams::kSensor, sc.detection_prob)) return;
      const bool indicator =
          applied.status == EventStatus::applied &&
          (e.kind == EventKind::exploit || e.kind == EventKind::escalate || e.kind == EventKind::impact);
      sensor_.pending.push_back({e.timestamp + sc.report_delay, h, indicator});
    } else if (e.source == Actor::green) {
      if (!e.payload.anomalous) return;
      if (rng.bernoulli(streams::kSensor, sc.false_positive_prob)) {
        sensor_.pending.push_back({e.timestamp + sc.report_delay, h, true});
      }
    } else if (e.source == Actor::blue && applied.status == EventStatus::applied) {
      switch (e.payload.action) {
        case ActionKind::scan: {
          const bool found = e.payload.finding && rng.bernoulli(streams::kSensor, sc.detection_prob);
          sensor_.detected[h] = found;
          if (found) sensor_.alert_count[h] += 1.0;
          break;
        }
        case ActionKind::restore:
          sensor_.detected[h] = false;
          sensor_.alert_count[h] = 0.0;
          break;
        case ActionKind::quarantine: sensor_.quarantined[h] = true; break;
        case ActionKind::release: sensor_.quarantined[h] = false; break;
        default: break;
      }
    }
  }

  void deliver_alerts(double t_end) {
    std::vector<SensorState::PendingAlert> keep;
    for (const auto& p : sensor_.pending) {
      if (p.deliver_at <= t_end) {
        sensor_.alert_count[p.host] += 1.0;
        if (p.compromise_indicator) sensor_.detected[p.host] = true;
      } else {
        keep.push_back(p);
      }
    }
    sensor_.pending = std::move(keep);
  }

  Observation build_observation() const {
    Observation o;
    o.step_index = step_;
    o.last_action_feedback = feedback_;
    const bool oracle = config_->pomdp.sensor.mode == SensorMode::omniscient_oracle;
    o.factored.reserve(net_.hosts.size());
    for (std::size_t i = 0; i < net_.hosts.size(); ++i) {
      const auto& h = net_.hosts[i];
      NodeRecord r;
      r.host_id = h.id;
      r.role[static_cast<std::size_t>(h.role)] = 1.0;
      r.alert_count = sensor_.alert_count[i];
      if (oracle) {
        r.detected_compromise = h.compromise != Compromise::none;
        r.quarantined = h.quarantined;
        r.compromise_level = static_cast<int>(h.compromise);
        r.red_stage = static_cast<int>(campaign_.stage[i]);
      } else {
        r.detected_compromise = sensor_.detected[i];
        r.quarantined = sensor_.quarantined[i];
      }
      o.factored.push_back(std::move(r));
    }
    o.flat = flatten(o.factored, config_->pomdp.sensor.fields);
    return o;
  }

  std::shared_ptr<const ScenarioConfig> config_;
  EnvOptions options_;
  std::vector<ActionInstance> actions_;
  std::vector<std::string> layout_;
  std::size_t pass_index_ = 0;

  NetworkState net_;
  RedCampaignState campaign_;
  SensorState sensor_;
  std::size_t step_ = 0;
  bool started_ = false;
  bool done_ = false;
  std::optional<std::size_t> in_progress_;
  bool completed_in_window_ = false;
  ActionFeedback feedback_ = ActionFeedback::none;
  std::vector<AppliedEvent> trace_;
  std::vector<AppliedEvent> window_events_;
  Observation obs_;
  DrawHook* hook_ = nullptr;
};

}  // namespace acdsim
