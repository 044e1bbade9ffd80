#pragma once

// Scripted/stochastic red (threat) and green (benign user) processes. Both
// wake on service_tick events and return the events they emit at that
// instant plus the natural time of their next wake-up.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "acdsim/config.hpp"
#include "acdsim/netsim.hpp"
#include "acdsim/random.hpp"

namespace acdsim {

enum class RedStage { unknown, discovered, user, root, impacted };

template <>
struct EnumNames<RedStage> {
  static constexpr auto names =
      std::to_array<std::string_view>({"unknown", "discovered", "user", "root", "impacted"});
  static constexpr std::string_view type = "RedStage";
};

struct RedCampaignState {
  std::vector<RedStage> stage;  // per host, declaration order
  Targeting mode = Targeting::fixed_path;
  std::optional<std::size_t> target;
  bool operator==(const RedCampaignState&) const = default;

  /// Hosts red holds (stage >= user).
  std::vector<std::size_t> footholds() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < stage.size(); ++i) {
      if (stage[i] >= RedStage::user) out.push_back(i);
    }
    return out;
  }
};

struct ActorEmission {
  std::vector<Event> events;
  // Natural time of the next wake-up; NaN when the actor retires.
  double next_wake = std::numeric_limits<double>::quiet_NaN();
};

inline RedCampaignState make_campaign(const ScenarioConfig& config) {
  RedCampaignState c;
  c.stage.reserve(config.topology.hosts.size());
  for (const auto& h : config.topology.hosts) {
    switch (h.initial_compromise) {
      case Compromise::none: c.stage.push_back(RedStage::unknown); break;
      case Compromise::user: c.stage.push_back(RedStage::user); break;
      case Compromise::root: c.stage.push_back(RedStage::root); break;
    }
  }
  c.mode = config.red.targeting;
  return c;
}

namespace detail {

inline bool red_finished(const NetworkState& state, const RedCampaignState& c, std::size_t i) {
  if (state.hosts[i].role == Role::critical_server) return c.stage[i] == RedStage::impacted;
  return c.stage[i] >= RedStage::root;
}

inline bool red_candidate(const NetworkState& state, const RedCampaignState& c, std::size_t i) {
  if (state.hosts[i].quarantined || red_finished(state, c, i)) return false;
  return c.stage[i] >= RedStage::user || red_reachable(state, i);
}

inline KillStage next_kill_stage(RedStage s) {
  switch (s) {
    case RedStage::unknown: return KillStage::discover;
    case RedStage::discovered: return KillStage::exploit;
    case RedStage::user: return KillStage::escalate;
    default: return KillStage::impact;
  }
}

inline EventKind kill_stage_event(KillStage s) {
  switch (s) {
    case KillStage::discover: return EventKind::scan;
    case KillStage::exploit: return EventKind::exploit;
    case KillStage::escalate: return EventKind::escalate;
    case KillStage::impact: return EventKind::impact;
  }
  return EventKind::scan;
}

inline std::optional<std::size_t> choose_target(const ScenarioConfig& config,
                                                const NetworkState& state, RedCampaignState& c,
                                                RandomStreams& rng) {
  const std::size_t n = state.hosts.size();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (red_candidate(state, c, i)) candidates.push_back(i);
  }
  if (candidates.empty()) return std::nullopt;

  switch (c.mode) {
    case Targeting::fixed_path: {
      if (config.red.path.empty()) return candidates.front();
      for (const auto& id : config.red.path) {
        const auto i = state.index_of(id);
        if (red_candidate(state, c, i)) return i;
      }
      return std::nullopt;
    }
    case Targeting::random_reachable: {
      if (c.target && red_candidate(state, c, *c.target)) return c.target;
      if (config.red.mode == RedMode::deterministic) return candidates.front();
      return candidates[rng.index(streams::kRed, candidates.size())];
    }
    case Targeting::prefer_critical: {
      std::size_t best = candidates.front();
      for (auto i : candidates) {
        if (state.hosts[i].role > state.hosts[best].role) best = i;
      }
      return best;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// One red wake-up at `now`.
///
/// Switching campaigns first swap targeting mode with switch_prob (on the
/// red.switch stream). The chosen target receives its next kill-chain event
/// (scan, exploit, escalate, impact); the next wake-up is now + the stage
/// delay, jittered by a factor in [1 - jitter, 1 + jitter] outside
/// deterministic mode. With no legal target nothing is emitted and red
/// sleeps for the discover delay.
inline ActorEmission red_step(RedCampaignState& campaign, const ScenarioConfig& config,
                              const NetworkState& truth, double now, RandomStreams& rng) {
  const auto& red = config.red;
  ActorEmission out;

  if (red.mode == RedMode::switching && rng.bernoulli(streams::kRedSwitch, red.switch_prob)) {
    campaign.mode = campaign.mode == red.targeting ? red.alt_targeting : red.targeting;
    campaign.target.reset();
  }

  KillStage stage = KillStage::discover;
  campaign.target = detail::choose_target(config, truth, campaign, rng);
  if (campaign.target) {
    const auto i = *campaign.target;
    stage = detail::next_kill_stage(campaign.stage[i]);
    Event e;
    e.timestamp = now;
    e.source = Actor::red;
    e.kind = detail::kill_stage_event(stage);
    e.subject = truth.hosts[i].id;
    if (stage == KillStage::exploit && !truth.entry_subnets.count(truth.hosts[i].subnet)) {
      for (auto f : campaign.footholds()) {
        const auto& fh = truth.hosts[f];
        if (f != i && !fh.quarantined && truth.subnets_linked(fh.subnet, truth.hosts[i].subnet)) {
          e.peer = fh.id;
          break;
        }
      }
    }
    e.payload.success_prob = red.mode == RedMode::deterministic ? 1.0 : red.success_probs.at(stage);
    e.payload.artifact_suppressed = rng.bernoulli(streams::kRedStealth, red.stealth);
    out.events.push_back(std::move(e));
  }

  double delay = red.stage_delays.at(stage);
  if (red.mode != RedMode::deterministic && red.jitter > 0.0) {
    delay *= 1.0 + red.jitter * (2.0 * rng.uniform(streams::kRed) - 1.0);
  }
  out.next_wake = now + delay;
  return out;
}

/// Folds an applied event into red's knowledge. Only successful red events
/// advance stages; a successful blue restore knocks red back to discovered.
inline void observe_for_red(RedCampaignState& campaign, const NetworkState& state,
                            const AppliedEvent& applied) {
  if (applied.status != EventStatus::applied) return;
  const auto& e = applied.event;
  if (e.subject.empty()) return;
  const auto i = state.index_of(e.subject);
  auto& stage = campaign.stage[i];
  if (e.source == Actor::red) {
    switch (e.kind) {
      case EventKind::scan:
        // A scan maps the target's subnet and the subnets linked to it.
        for (std::size_t j = 0; j < state.hosts.size(); ++j) {
          if (state.subnets_linked(state.hosts[i].subnet, state.hosts[j].subnet) && !state.hosts[j].quarantined &&
              campaign.stage[j] == RedStage::unknown) {
            campaign.stage[j] = RedStage::discovered;
          }
        }
        break;
      case EventKind::exploit: stage = RedStage::user; break;
      case EventKind::escalate: stage = RedStage::root; break;
      case EventKind::impact: stage = RedStage::impacted; break;
      default: break;
    }
  } else if (e.source == Actor::blue && e.kind == EventKind::action_complete &&
             e.payload.action == ActionKind::restore && stage >= RedStage::user) {
    stage = RedStage::discovered;
  }
}

namespace detail {

template <typename Weights>
std::size_t pick_weighted(const Weights& weights, double u) {
  double total = 0.0;
  for (double w : weights) total += w;
  double acc = 0.0;
  const double target = u * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return i;
  }
  // u * total can round up to total; fall back to the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return 0;
}

}  // namespace detail

/// One green wake-up at `now`: a single benign request.
///
/// Draw order on the green stream, one uniform each: requesting host
/// (weighted by rate), target service (weighted), anomaly flag, and the
/// exponential inter-arrival time to the next wake-up.
inline ActorEmission green_step(const ScenarioConfig& config, const NetworkState& truth, double now,
                                RandomStreams& rng) {
  ActorEmission out;
  const double rate = green_total_rate(config);
  if (!(rate > 0.0)) return out;

  const auto& hosts = config.topology.hosts;
  std::vector<double> host_w;
  host_w.reserve(hosts.size());
  for (const auto& h : hosts) host_w.push_back(green_rate_of(config.green, h.id));
  const auto requester = detail::pick_weighted(host_w, rng.uniform(streams::kGreen));

  const auto& services = config.topology.services;
  std::vector<double> svc_w;
  for (const auto& s : services) {
    if (config.green.service_weights.empty()) {
      svc_w.push_back(1.0);
    } else {
      auto it = config.green.service_weights.find(s.id);
      svc_w.push_back(it == config.green.service_weights.end() ? 0.0 : it->second);
    }
  }
  const double u_service = rng.uniform(streams::kGreen);
  const bool anomalous = rng.bernoulli(streams::kGreen, config.green.anomaly_prob);

  if (!services.empty()) {
    const auto& svc = services[detail::pick_weighted(svc_w, u_service)];
    auto it = truth.service_host.find(svc.id);
    if (it != truth.service_host.end()) {
      Event e;
      e.timestamp = now;
      e.source = Actor::green;
      e.kind = EventKind::benign_request;
      e.subject = truth.hosts[it->second].id;
      e.peer = truth.hosts[requester].id;
      e.payload.anomalous = anomalous;
      out.events.push_back(std::move(e));
    }
  }
  out.next_wake = now + rng.exponential(streams::kGreen, rate);
  return out;
}

}  // namespace acdsim
