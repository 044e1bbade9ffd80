#pragma once

// Ground-truth network simulation: hosts, services, and a continuous-time
// event calendar ordered by (timestamp, seq).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "acdsim/config.hpp"
#include "acdsim/random.hpp"

namespace acdsim {

enum class EventKind {
  connect,
  scan,
  exploit,
  escalate,
  impact,
  benign_request,
  service_tick,
  action_complete
};
enum class EventStatus { applied, failed, void_ };

template <>
struct EnumNames<EventKind> {
  static constexpr auto names = std::to_array<std::string_view>(
      {"connect", "scan", "exploit", "escalate", "impact", "benign_request", "service_tick",
       "action_complete"});
  static constexpr std::string_view type = "EventKind";
};
template <>
struct EnumNames<EventStatus> {
  static constexpr auto names = std::to_array<std::string_view>({"applied", "failed", "void"});
  static constexpr std::string_view type = "EventStatus";
};

/// Shortest round-trip decimal text of `v`.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, end);
}

struct EventPayload {
  // Red stage events: probability the attempt succeeds when applied.
  double success_prob = 1.0;
  bool artifact_suppressed = false;
  // Green requests.
  bool anomalous = false;
  // action_complete.
  ActionKind action = ActionKind::pass;
  int action_index = -1;
  bool success = false;
  // Set on application of a successful blue scan: host found compromised.
  bool finding = false;
  bool operator==(const EventPayload&) const = default;
};

struct Event {
  double timestamp = 0.0;
  std::uint64_t seq = 0;
  Actor source = Actor::system;
  EventKind kind = EventKind::service_tick;
  HostId subject;
  HostId peer;
  EventPayload payload;
  bool operator==(const Event&) const = default;
};

struct AppliedEvent {
  Event event;
  EventStatus status = EventStatus::applied;
  bool operator==(const AppliedEvent&) const = default;
};

/// `timestamp,seq,source,kind,subject[,peer]`
inline std::string format_trace_line(const Event& e) {
  std::string line = format_double(e.timestamp);
  line += ',';
  line += std::to_string(e.seq);
  line += ',';
  line += to_string(e.source);
  line += ',';
  line += to_string(e.kind);
  line += ',';
  line += e.subject;
  if (!e.peer.empty()) {
    line += ',';
    line += e.peer;
  }
  return line;
}

inline std::string format_trace(const std::vector<AppliedEvent>& events) {
  std::string out;
  for (const auto& a : events) {
    out += format_trace_line(a.event);
    out += '\n';
  }
  return out;
}

/// Pending events keyed by (timestamp, seq).
class EventCalendar {
 public:
  using Key = std::pair<double, std::uint64_t>;

  /// Inserts `e` with the next sequence number and returns that number.
  std::uint64_t insert(Event e) {
    e.seq = next_seq_++;
    const auto seq = e.seq;
    events_.emplace(Key{e.timestamp, e.seq}, std::move(e));
    return seq;
  }

  bool empty() const noexcept { return events_.empty(); }
  std::size_t size() const noexcept { return events_.size(); }
  std::uint64_t next_seq() const noexcept { return next_seq_; }

  const Event& top() const { return events_.begin()->second; }

  Event pop() {
    auto node = events_.extract(events_.begin());
    return std::move(node.mapped());
  }

  /// Removes and returns every event at exactly `t` matching `pred`, in order.
  template <typename Pred>
  std::vector<Event> extract_at(double t, Pred pred) {
    std::vector<Event> out;
    auto it = events_.lower_bound(Key{t, 0});
    while (it != events_.end() && it->first.first == t) {
      if (pred(it->second)) {
        out.push_back(std::move(it->second));
        it = events_.erase(it);
      } else {
        ++it;
      }
    }
    return out;
  }

  template <typename Fn>
  void for_each(Fn fn) const {
    for (const auto& [key, e] : events_) fn(e);
  }

 private:
  std::map<Key, Event> events_;
  std::uint64_t next_seq_ = 0;
};

struct Host {
  HostId id;
  SubnetId subnet;
  Role role = Role::workstation;
  std::vector<ServiceId> services;
  Compromise compromise = Compromise::none;
  bool quarantined = false;
  bool impacted = false;
  double availability = 1.0;
};

struct NetworkState {
  double clock = 0.0;
  std::vector<Host> hosts;
  std::map<HostId, std::size_t, std::less<>> host_index;
  std::map<ServiceId, std::size_t, std::less<>> service_host;
  std::set<std::pair<SubnetId, SubnetId>> links;
  std::set<SubnetId, std::less<>> entry_subnets;
  std::set<ServiceId, std::less<>> vulnerable_services;
  EventCalendar calendar;
  RandomStreams rng;
  // Green request accounting for the current step window.
  std::vector<std::uint32_t> window_requests;
  std::vector<std::uint32_t> window_served;

  std::size_t index_of(std::string_view id) const {
    auto it = host_index.find(id);
    if (it == host_index.end()) throw std::out_of_range("unknown host: " + std::string(id));
    return it->second;
  }
  Host& host(std::string_view id) { return hosts[index_of(id)]; }
  const Host& host(std::string_view id) const { return hosts[index_of(id)]; }

  bool subnets_linked(const SubnetId& a, const SubnetId& b) const {
    return a == b || links.count({a, b}) > 0;
  }
};

struct HostTruth {
  HostId id;
  Role role = Role::workstation;
  Compromise compromise = Compromise::none;
  bool quarantined = false;
  bool impacted = false;
  double availability = 1.0;
  bool operator==(const HostTruth&) const = default;
};

/// Read-only ground truth; consumed by evaluation and oracle tests only.
struct TruthRecord {
  double clock = 0.0;
  std::vector<HostTruth> hosts;
  bool operator==(const TruthRecord&) const = default;

  std::size_t compromised_count() const {
    return static_cast<std::size_t>(std::count_if(
        hosts.begin(), hosts.end(), [](const HostTruth& h) { return h.compromise != Compromise::none; }));
  }
  bool critical_impacted() const {
    return std::any_of(hosts.begin(), hosts.end(), [](const HostTruth& h) {
      return h.role == Role::critical_server && h.impacted;
    });
  }
};

inline TruthRecord snapshot_truth(const NetworkState& state) {
  TruthRecord rec;
  rec.clock = state.clock;
  rec.hosts.reserve(state.hosts.size());
  for (const auto& h : state.hosts) {
    rec.hosts.push_back({h.id, h.role, h.compromise, h.quarantined, h.impacted, h.availability});
  }
  return rec;
}

/// Called after every applied (or voided) event; may schedule new events.
class EventHook {
 public:
  virtual ~EventHook() = default;
  virtual void on_applied(NetworkState& state, const AppliedEvent& applied) = 0;
};

// ---------------------------------------------------------------------------
// construction

namespace detail {

inline void require_unique(const std::vector<std::string>& ids, std::string_view what) {
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (id.empty()) throw ConfigError(std::string(what) + " id must be non-empty");
    if (!seen.insert(id).second) throw ConfigError("duplicate " + std::string(what) + " id: " + id);
  }
}

}  // namespace detail

/// Slot time for a turn-based wake-up requested at `natural`.
inline double snap_to_slot(double natural, double quantum) {
  const double k = std::ceil(natural / quantum - 1e-9);
  return std::max(0.0, k) * quantum;
}

/// Builds the initial topology and host state; no events are scheduled.
/// Actor wake-ups are seeded by the task layer (see Env), which owns the
/// actor processes.
inline NetworkState build_topology(const ScenarioConfig& config, std::uint64_t master_seed) {
  const auto& topo = config.topology;
  if (topo.hosts.empty()) throw ConfigError("empty topology");

  detail::require_unique(topo.subnets, "subnet");
  {
    std::vector<std::string> ids;
    for (const auto& s : topo.services) ids.push_back(s.id);
    detail::require_unique(ids, "service");
    ids.clear();
    for (const auto& h : topo.hosts) ids.push_back(h.id);
    detail::require_unique(ids, "host");
  }
  const std::set<std::string> subnets(topo.subnets.begin(), topo.subnets.end());

  NetworkState state;
  state.rng = RandomStreams(master_seed);
  for (const auto& s : topo.services) {
    if (s.vulnerable) state.vulnerable_services.insert(s.id);
  }
  std::map<std::string, bool> service_known;
  for (const auto& s : topo.services) service_known[s.id] = false;

  for (const auto& hc : topo.hosts) {
    if (!subnets.count(hc.subnet)) {
      throw ConfigError("host " + hc.id + " references unknown subnet: " + hc.subnet);
    }
    for (const auto& sid : hc.services) {
      auto it = service_known.find(sid);
      if (it == service_known.end()) {
        throw ConfigError("host " + hc.id + " references unknown service: " + sid);
      }
      if (it->second) throw ConfigError("service offered by more than one host: " + sid);
      it->second = true;
      state.service_host[sid] = state.hosts.size();
    }
    state.host_index[hc.id] = state.hosts.size();
    Host h;
    h.id = hc.id;
    h.subnet = hc.subnet;
    h.role = hc.role;
    h.services = hc.services;
    h.compromise = hc.initial_compromise;
    state.hosts.push_back(std::move(h));
  }
  for (const auto& [a, b] : topo.adjacency) {
    for (const auto& s : {a, b}) {
      if (!subnets.count(s)) throw ConfigError("adjacency references unknown subnet: " + s);
    }
    state.links.insert({a, b});
    state.links.insert({b, a});
  }
  for (const auto& s : topo.entry_subnets) {
    if (!subnets.count(s)) throw ConfigError("entry_subnets references unknown subnet: " + s);
    state.entry_subnets.insert(s);
  }
  state.window_requests.assign(state.hosts.size(), 0);
  state.window_served.assign(state.hosts.size(), 0);
  return state;
}

inline std::uint64_t schedule_event(NetworkState& state, Event event) {
  if (!(event.timestamp >= state.clock)) {
    throw std::invalid_argument("cannot schedule event at t=" + format_double(event.timestamp) +
                                " before clock " + format_double(state.clock));
  }
  return state.calendar.insert(std::move(event));
}

/// True when red can reach `host` from outside or from a live foothold.
inline bool red_reachable(const NetworkState& state, std::size_t host) {
  const auto& target = state.hosts[host];
  if (state.entry_subnets.count(target.subnet)) return true;
  for (std::size_t i = 0; i < state.hosts.size(); ++i) {
    const auto& f = state.hosts[i];
    if (i == host || f.quarantined || f.compromise == Compromise::none) continue;
    if (state.subnets_linked(f.subnet, target.subnet)) return true;
  }
  return false;
}

inline bool has_vulnerable_service(const NetworkState& state, const Host& h) {
  return std::any_of(h.services.begin(), h.services.end(),
                     [&](const ServiceId& s) { return state.vulnerable_services.count(s) > 0; });
}

/// Applies one popped event to the state. Mutates `e.payload.finding` for
/// blue scans.
inline EventStatus apply_event(NetworkState& state, Event& e) {
  auto host_ptr = [&](const HostId& id) -> Host* {
    if (id.empty()) return nullptr;
    auto it = state.host_index.find(id);
    return it == state.host_index.end() ? nullptr : &state.hosts[it->second];
  };
  Host* h = host_ptr(e.subject);
  auto attempt = [&](auto&& on_success) {
    if (!state.rng.bernoulli(streams::kRed, e.payload.success_prob)) return EventStatus::failed;
    on_success();
    return EventStatus::applied;
  };

  switch (e.kind) {
    case EventKind::service_tick:
      return EventStatus::applied;
    case EventKind::connect:
    case EventKind::scan:
      if (!h || h->quarantined) return EventStatus::void_;
      return EventStatus::applied;
    case EventKind::exploit:
      if (!h || h->quarantined || h->compromise != Compromise::none ||
          !red_reachable(state, state.index_of(h->id)) || !has_vulnerable_service(state, *h)) {
        return EventStatus::void_;
      }
      return attempt([&] { h->compromise = Compromise::user; });
    case EventKind::escalate:
      if (!h || h->quarantined || h->compromise != Compromise::user) return EventStatus::void_;
      return attempt([&] { h->compromise = Compromise::root; });
    case EventKind::impact:
      if (!h || h->quarantined || h->compromise != Compromise::root ||
          h->role != Role::critical_server || h->impacted) {
        return EventStatus::void_;
      }
      return attempt([&] {
        h->impacted = true;
        h->availability = 0.0;
      });
    case EventKind::benign_request: {
      if (!h) return EventStatus::void_;
      const auto idx = state.index_of(h->id);
      ++state.window_requests[idx];
      const Host* origin = host_ptr(e.peer);
      if (h->quarantined || (origin && origin->quarantined)) return EventStatus::void_;
      if (h->compromise == Compromise::root || h->impacted) return EventStatus::failed;
      ++state.window_served[idx];
      return EventStatus::applied;
    }
    case EventKind::action_complete:
      if (!e.payload.success) return EventStatus::failed;
      if (h) {
        switch (e.payload.action) {
          case ActionKind::scan:
            e.payload.finding = h->compromise != Compromise::none;
            break;
          case ActionKind::restore:
            h->compromise = Compromise::none;
            h->impacted = false;
            h->availability = 1.0;
            break;
          case ActionKind::quarantine:
            h->quarantined = true;
            break;
          case ActionKind::release:
            h->quarantined = false;
            break;
          default:
            break;
        }
      }
      return EventStatus::applied;
  }
  return EventStatus::void_;
}

/// Pops and applies every event with timestamp <= t_stop in (timestamp, seq)
/// order, including events scheduled by `hook` along the way, then sets the
/// clock to t_stop.
inline std::vector<AppliedEvent> advance_until(NetworkState& state, double t_stop,
                                               EventHook* hook = nullptr) {
  if (!(t_stop >= state.clock)) {
    throw std::invalid_argument("advance_until target " + format_double(t_stop) +
                                " precedes clock " + format_double(state.clock));
  }
  std::vector<AppliedEvent> applied;
  while (!state.calendar.empty() && state.calendar.top().timestamp <= t_stop) {
    Event e = state.calendar.pop();
    state.clock = e.timestamp;
    const auto status = apply_event(state, e);
    applied.push_back({std::move(e), status});
    if (hook) hook->on_applied(state, applied.back());
  }
  state.clock = t_stop;
  return applied;
}

inline double green_rate_of(const GreenProfileConfig& green, const HostId& host) {
  auto it = green.rates.find(host);
  return it == green.rates.end() ? green.default_rate : it->second;
}

/// Total green request rate in events per simulated second.
inline double green_total_rate(const ScenarioConfig& config) {
  double per_hour = 0.0;
  for (const auto& h : config.topology.hosts) per_hour += green_rate_of(config.green, h.id);
  return per_hour / 3600.0;
}

inline double turn_quantum(const ScenarioConfig& config) {
  const auto& il = config.pomdp.interleaving;
  return il.quantum > 0.0 ? il.quantum : config.pomdp.sequence.dt;
}

/// Schedules `actor`'s next wake-up (a service_tick) for `natural`.
///
/// Concurrent interleaving keeps the natural time. Turn-based interleaving
/// snaps it up to the next slot boundary, and wake-ups sharing a slot fire in
/// the configured actor order: later-ranked wake-ups already in that slot are
/// re-inserted behind this one.
inline void schedule_wakeup(NetworkState& state, const ScenarioConfig& config, Actor actor,
                            double natural) {
  Event wake;
  wake.source = actor;
  wake.kind = EventKind::service_tick;
  const auto& il = config.pomdp.interleaving;
  if (il.mode == Interleaving::concurrent) {
    wake.timestamp = natural;
    schedule_event(state, std::move(wake));
    return;
  }
  const double slot = std::max(state.clock, snap_to_slot(natural, turn_quantum(config)));
  auto rank = [&](Actor a) {
    auto it = std::find(il.order.begin(), il.order.end(), a);
    return static_cast<std::size_t>(it - il.order.begin());
  };
  const auto my_rank = rank(actor);
  auto behind = state.calendar.extract_at(slot, [&](const Event& e) {
    return e.kind == EventKind::service_tick && e.source != actor && rank(e.source) > my_rank;
  });
  wake.timestamp = slot;
  schedule_event(state, std::move(wake));
  for (auto& e : behind) schedule_event(state, std::move(e));
}

/// Fresh ground-truth state: all hosts clean, clock 0, and the calendar
/// seeded with each active actor's first wake-up. Red wakes at start_time;
/// green's first arrival is an exponential draw on the green stream.
inline NetworkState build_network(const ScenarioConfig& config, std::uint64_t master_seed) {
  NetworkState state = build_topology(config, master_seed);
  if (config.red.enabled) schedule_wakeup(state, config, Actor::red, config.red.start_time);
  const double rate = green_total_rate(config);
  if (rate > 0.0) {
    schedule_wakeup(state, config, Actor::green, state.rng.exponential(streams::kGreen, rate));
  }
  return state;
}

inline void begin_window(NetworkState& state) {
  std::fill(state.window_requests.begin(), state.window_requests.end(), 0u);
  std::fill(state.window_served.begin(), state.window_served.end(), 0u);
}

/// Availability = served fraction of green requests in the window; hosts
/// with no requests report 1, or 0 while impacted.
inline void end_window(NetworkState& state) {
  for (std::size_t i = 0; i < state.hosts.size(); ++i) {
    auto& h = state.hosts[i];
    if (state.window_requests[i] > 0) {
      h.availability = static_cast<double>(state.window_served[i]) / state.window_requests[i];
    } else {
      h.availability = h.impacted ? 0.0 : 1.0;
    }
  }
}

}  // namespace acdsim
