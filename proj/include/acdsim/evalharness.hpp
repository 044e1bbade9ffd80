#pragma once

// Multi-seed evaluation: returns with confidence intervals plus system-level
// behaviour metrics taken from ground truth, never from the reward path.

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "acdsim/rlcore.hpp"
#include "acdsim/scenario_io.hpp"
#include "acdsim/taskmodel.hpp"

namespace acdsim {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

struct CiMethod {
  enum class Kind { t, bootstrap } kind = Kind::t;
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;

  static CiMethod student_t() { return {}; }
  static CiMethod bootstrap(std::size_t n, std::uint64_t seed) { return {Kind::bootstrap, n, seed}; }
};

inline std::string to_string(const CiMethod& m) {
  return m.kind == CiMethod::Kind::t ? "t" : "bootstrap";
}

namespace detail {

inline double mean_of(const std::vector<double>& xs) {
  // Exact for constant samples, so the degenerate interval holds the mean.
  if (!xs.empty() && std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) return xs.front();
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Linear interpolation between order statistics.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Two-sided interval for the mean at `level`.
///   t:         mean +- t_{n-1, (1+level)/2} * s / sqrt(n); needs n >= 2
///   bootstrap: percentile interval of resampled means, seeded
inline Interval confidence_interval(const std::vector<double>& samples, double level = 0.95,
                                    const CiMethod& method = {}) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
  if (method.kind == CiMethod::Kind::t) {
    if (samples.size() < 2) throw std::invalid_argument("t interval needs at least 2 samples");
    if (std::all_of(samples.begin(), samples.end(), [&](double x) { return x == samples.front(); })) {
      return {samples.front(), samples.front()};
    }
    const double m = detail::mean_of(samples);
    const double s = detail::sample_std(samples);
    boost::math::students_t dist(static_cast<double>(samples.size() - 1));
    const double t = boost::math::quantile(dist, 0.5 + level / 2.0);
    const double half = t * s / std::sqrt(static_cast<double>(samples.size()));
    return {m - half, m + half};
  }
  if (samples.empty()) throw std::invalid_argument("bootstrap interval needs at least 1 sample");
  if (method.resamples == 0) throw std::invalid_argument("bootstrap needs resamples > 0");
  std::mt19937_64 rng(stream_seed(method.seed, "bootstrap"));
  std::vector<double> means;
  means.reserve(method.resamples);
  const auto n = samples.size();
  for (std::size_t b = 0; b < method.resamples; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += samples[scale_index(unit_interval(rng()), n)];
    means.push_back(s / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  return {detail::quantile_sorted(means, tail), detail::quantile_sorted(means, 1.0 - tail)};
}

// ---------------------------------------------------------------------------
// episodes

struct EpisodeRecord {
  std::uint64_t seed = 0;
  std::size_t episode = 0;
  double ret = 0.0;
  double discounted_return = 0.0;
  std::size_t length = 0;
  bool terminated = false;
  bool truncated = false;
  // Mean over steps of the fraction of hosts compromised at step end.
  double compromised_fraction = 0.0;
  // Mean over steps and hosts of the served-request fraction.
  double availability = 0.0;
  std::size_t red_events = 0;
  std::vector<std::size_t> action_counts;
  // host -> red event kind -> count
  std::map<std::string, std::map<std::string, std::size_t>> attacks;
  bool operator==(const EpisodeRecord&) const = default;
};

struct RunSummary {
  std::string scenario;
  std::string scenario_hash;
  std::string policy;
  std::vector<std::uint64_t> seeds;
  std::size_t episodes_per_seed = 0;
  std::vector<EpisodeRecord> records;  // sorted by (seed, episode)

  std::vector<double> returns;
  double mean = 0.0;
  double std = 0.0;
  // False with a single episode: std is then reported as 0.
  bool std_defined = false;
  Interval ci;
  std::string ci_method = "t";
  double ci_level = 0.95;

  std::map<std::string, std::map<std::string, std::size_t>> attacks;
  std::size_t red_events = 0;
  std::vector<std::string> action_names;
  std::vector<double> action_distribution;
  double compromised_fraction = 0.0;
  double availability = 0.0;
  double length_mean = 0.0;
  std::size_t length_min = 0;
  std::size_t length_max = 0;
};

struct RunOptions {
  double level = 0.95;
  CiMethod ci;
  // Step cap for terminal and continuing horizons; 0 uses eval_window.
  std::size_t max_steps = 0;
};

namespace detail {

inline EpisodeRecord run_one(Env& env, const Policy& policy, std::uint64_t seed, std::size_t ep,
                             std::size_t cap) {
  EpisodeRecord rec;
  rec.seed = seed;
  rec.episode = ep;
  rec.action_counts.assign(env.actions().size(), 0);
  const auto s = episode_seed(seed, ep);
  PolicyRng rng(stream_seed(s, "policy"));
  auto obs = env.reset(s);
  std::vector<double> rewards;
  double comp = 0.0, avail = 0.0;
  for (std::size_t t = 0; t < cap; ++t) {
    const auto a = policy_action(policy, obs, env.legal_action_mask(), env.actions(), rng);
    auto res = env.step(a);
    ++rec.action_counts[res.info.masked_action ? env.pass_action() : a];
    rewards.push_back(res.reward);
    const auto truth = env.truth();
    const double nh = static_cast<double>(truth.hosts.size());
    comp += static_cast<double>(truth.compromised_count()) / nh;
    double av = 0.0;
    for (const auto& h : truth.hosts) av += h.availability;
    avail += av / nh;
    obs = std::move(res.obs);
    rec.terminated = res.terminated;
    rec.truncated = res.truncated;
    if (res.terminated || res.truncated) break;
  }
  rec.length = rewards.size();
  rec.ret = discounted_return(rewards, 1.0);
  rec.discounted_return = discounted_return(rewards, env.config().pomdp.gamma);
  if (rec.length > 0) {
    rec.compromised_fraction = comp / static_cast<double>(rec.length);
    rec.availability = avail / static_cast<double>(rec.length);
  }
  for (const auto& a : env.trace()) {
    const auto& e = a.event;
    if (e.source != Actor::red || e.kind == EventKind::service_tick) continue;
    ++rec.attacks[e.subject][std::string(to_string(e.kind))];
    ++rec.red_events;
  }
  return rec;
}

}  // namespace detail

/// Runs `episodes_per_seed` episodes for every seed. Episode k of seed s
/// resets with episode_seed(s, k) and the policy draws from a stream derived
/// from that. Aggregates are reduced in (seed, episode) order, so the result
/// does not depend on the order of `seeds`.
inline RunSummary run_episodes(const Policy& policy, const ScenarioConfig& scenario,
                               const std::vector<std::uint64_t>& seeds, std::size_t episodes_per_seed,
                               const RunOptions& options = {}) {
  if (seeds.empty()) throw std::invalid_argument("run_episodes needs at least one seed");
  if (episodes_per_seed == 0) throw std::invalid_argument("episodes_per_seed must be >= 1");
  Env env(scenario);
  const auto cap = detail::episode_step_cap(scenario, options.max_steps);

  RunSummary out;
  out.scenario = scenario.metadata.name;
  out.scenario_hash = scenario_hash(scenario);
  out.policy = policy_name(policy);
  out.seeds = seeds;
  out.episodes_per_seed = episodes_per_seed;
  for (const auto& a : env.actions()) out.action_names.push_back(a.name);

  auto order = seeds;
  std::sort(order.begin(), order.end());
  for (auto seed : order) {
    for (std::size_t ep = 0; ep < episodes_per_seed; ++ep) {
      try {
        out.records.push_back(detail::run_one(env, policy, seed, ep, cap));
      } catch (const std::exception& e) {
        throw std::runtime_error("seed " + std::to_string(seed) + " episode " + std::to_string(ep) + ": " +
                                 e.what());
      }
    }
  }

  std::vector<std::size_t> counts(env.actions().size(), 0);
  std::size_t total_steps = 0;
  double length_sum = 0.0;
  out.length_min = out.records.front().length;
  for (const auto& r : out.records) {
    out.returns.push_back(r.ret);
    for (std::size_t a = 0; a < counts.size(); ++a) counts[a] += r.action_counts[a];
    total_steps += r.length;
    length_sum += static_cast<double>(r.length);
    out.length_min = std::min(out.length_min, r.length);
    out.length_max = std::max(out.length_max, r.length);
    out.compromised_fraction += r.compromised_fraction;
    out.availability += r.availability;
    out.red_events += r.red_events;
    for (const auto& [host, kinds] : r.attacks) {
      for (const auto& [kind, n] : kinds) out.attacks[host][kind] += n;
    }
  }
  const double n = static_cast<double>(out.records.size());
  out.compromised_fraction /= n;
  out.availability /= n;
  out.length_mean = length_sum / n;
  out.action_distribution.assign(counts.size(), 0.0);
  if (total_steps > 0) {
    for (std::size_t a = 0; a < counts.size(); ++a) {
      out.action_distribution[a] = static_cast<double>(counts[a]) / static_cast<double>(total_steps);
    }
  }

  out.mean = detail::mean_of(out.returns);
  out.std_defined = out.returns.size() >= 2;
  out.std = detail::sample_std(out.returns);
  out.ci_level = options.level;
  out.ci_method = to_string(options.ci);
  if (options.ci.kind == CiMethod::Kind::t && !out.std_defined) {
    out.ci = {out.mean, out.mean};
  } else {
    out.ci = confidence_interval(out.returns, options.level, options.ci);
  }
  return out;
}

// ---------------------------------------------------------------------------
// reporting

inline constexpr std::string_view kEpisodeCsvHeader =
    "seed,episode,return,discounted_return,length,terminated,truncated,compromised_fraction,availability,"
    "red_events";

inline void write_episode_csv(const RunSummary& s, std::ostream& out) {
  out << kEpisodeCsvHeader << '\n';
  for (const auto& r : s.records) {
    out << r.seed << ',' << r.episode << ',' << format_double(r.ret) << ',' << format_double(r.discounted_return)
        << ',' << r.length << ',' << (r.terminated ? 1 : 0) << ',' << (r.truncated ? 1 : 0) << ','
        << format_double(r.compromised_fraction) << ',' << format_double(r.availability) << ',' << r.red_events
        << '\n';
  }
}

inline nlohmann::ordered_json summary_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["scenario_hash"] = s.scenario_hash;
  j["policy"] = s.policy;
  j["seeds"] = s.seeds;
  j["episodes_per_seed"] = s.episodes_per_seed;
  j["episodes"] = s.records.size();
  j["mean_return"] = s.mean;
  j["std_return"] = s.std;
  j["std_defined"] = s.std_defined;
  j["ci"] = {{"method", s.ci_method}, {"level", s.ci_level}, {"lo", s.ci.lo}, {"hi", s.ci.hi}};
  nlohmann::ordered_json dist = nlohmann::ordered_json::object();
  for (std::size_t a = 0; a < s.action_names.size(); ++a) dist[s.action_names[a]] = s.action_distribution[a];
  j["action_distribution"] = dist;
  j["attacks"] = s.attacks;
  j["red_events"] = s.red_events;
  j["compromised_fraction"] = s.compromised_fraction;
  j["availability"] = s.availability;
  j["length"] = {{"mean", s.length_mean}, {"min", s.length_min}, {"max", s.length_max}};
  return j;
}

struct ComparisonReport {
  std::string policy_a, policy_b;
  double mean_a = 0.0, mean_b = 0.0;
  double mean_diff = 0.0;  // a - b
  Interval ci_a, ci_b;
  bool ci_overlap = true;
  std::vector<std::string> action_names;
  std::vector<double> actions_a, actions_b;
  // Total variation distance between the action distributions.
  double action_tv = 0.0;
  bool behavioural_divergence = false;
  std::map<std::string, std::map<std::string, std::size_t>> attacks_a, attacks_b;
  double availability_a = 0.0, availability_b = 0.0;
  double compromised_a = 0.0, compromised_b = 0.0;
};

inline constexpr double kDivergenceThreshold = 0.05;

/// Side-by-side comparison. Both runs must share the scenario and the seed
/// protocol.
inline ComparisonReport compare_policies(const RunSummary& a, const RunSummary& b) {
  if (a.scenario_hash != b.scenario_hash) {
    throw std::invalid_argument("scenario hash mismatch: " + a.scenario_hash + " vs " + b.scenario_hash);
  }
  auto sa = a.seeds, sb = b.seeds;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb || a.episodes_per_seed != b.episodes_per_seed) {
    throw std::invalid_argument("seed protocol mismatch between runs");
  }
  ComparisonReport r;
  r.policy_a = a.policy;
  r.policy_b = b.policy;
  r.mean_a = a.mean;
  r.mean_b = b.mean;
  r.mean_diff = a.mean - b.mean;
  r.ci_a = a.ci;
  r.ci_b = b.ci;
  r.ci_overlap = a.ci.lo <= b.ci.hi && b.ci.lo <= a.ci.hi;
  r.action_names = a.action_names;
  r.actions_a = a.action_distribution;
  r.actions_b = b.action_distribution;
  for (std::size_t i = 0; i < r.actions_a.size(); ++i) r.action_tv += std::abs(r.actions_a[i] - r.actions_b[i]);
  r.action_tv /= 2.0;
  r.behavioural_divergence = r.action_tv > kDivergenceThreshold;
  r.attacks_a = a.attacks;
  r.attacks_b = b.attacks;
  r.availability_a = a.availability;
  r.availability_b = b.availability;
  r.compromised_a = a.compromised_fraction;
  r.compromised_b = b.compromised_fraction;
  return r;
}

inline std::string report_text(const ComparisonReport& r) {
  std::ostringstream out;
  auto row = [&](const std::string& label, const std::string& va, const std::string& vb) {
    out << label;
    for (std::size_t i = label.size(); i < 28; ++i) out << ' ';
    out << va;
    for (std::size_t i = va.size(); i < 24; ++i) out << ' ';
    out << vb << '\n';
  };
  auto ci = [](const Interval& i) { return "[" + format_double(i.lo) + ", " + format_double(i.hi) + "]"; };
  row("", r.policy_a, r.policy_b);
  row("mean return", format_double(r.mean_a), format_double(r.mean_b));
  row("95% CI", ci(r.ci_a), ci(r.ci_b));
  row("availability", format_double(r.availability_a), format_double(r.availability_b));
  row("compromised fraction", format_double(r.compromised_a), format_double(r.compromised_b));
  for (std::size_t i = 0; i < r.action_names.size(); ++i) {
    row("action " + r.action_names[i], format_double(r.actions_a[i]), format_double(r.actions_b[i]));
  }
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto* t : {&r.attacks_a, &r.attacks_b}) {
    for (const auto& [h, kinds] : *t) {
      for (const auto& [k, n] : kinds) keys.insert({h, k});
    }
  }
  auto count = [](const auto& t, const std::string& h, const std::string& k) -> std::size_t {
    auto it = t.find(h);
    if (it == t.end()) return 0;
    auto jt = it->second.find(k);
    return jt == it->second.end() ? 0 : jt->second;
  };
  for (const auto& [h, k] : keys) {
    row("attacks " + h + " " + k, std::to_string(count(r.attacks_a, h, k)), std::to_string(count(r.attacks_b, h, k)));
  }
  out << "mean difference (a - b): " << format_double(r.mean_diff) << '\n';
  out << "CI overlap: " << (r.ci_overlap ? "yes" : "no") << '\n';
  out << "action distribution TV distance: " << format_double(r.action_tv)
      << (r.behavioural_divergence ? " (behavioural divergence)" : "") << '\n';
  return out.str();
}

/// metric,a,b rows; the same quantities as the text table.
inline std::string report_csv(const ComparisonReport& r) {
  std::ostringstream out;
  out << "metric," << r.policy_a << ',' << r.policy_b << '\n';
  auto row = [&](const std::string& m, double a, double b) {
    out << m << ',' << format_double(a) << ',' << format_double(b) << '\n';
  };
  row("mean_return", r.mean_a, r.mean_b);
  row("ci_lo", r.ci_a.lo, r.ci_b.lo);
  row("ci_hi", r.ci_a.hi, r.ci_b.hi);
  row("availability", r.availability_a, r.availability_b);
  row("compromised_fraction", r.compromised_a, r.compromised_b);
  for (std::size_t i = 0; i < r.action_names.size(); ++i) {
    row("action:" + r.action_names[i], r.actions_a[i], r.actions_b[i]);
  }
  return out.str();
}

}  // namespace acdsim
