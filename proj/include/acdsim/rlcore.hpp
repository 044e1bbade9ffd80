#pragma once

// Returns, an exact enumeration oracle (MDP extraction + value iteration),
// tabular Q-learning, and baseline policies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "acdsim/netsim.hpp"
#include "acdsim/random.hpp"
#include "acdsim/taskmodel.hpp"

namespace acdsim {

/// G = sum_k gamma^k r_k (Horner form, from the back).
inline double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0, 1]");
  double g = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) g = rewards[i] + gamma * g;
  return g;
}

// ---------------------------------------------------------------------------
// MDP model and exact enumeration

struct Transition {
  std::size_t next = 0;
  double prob = 0.0;
  double reward = 0.0;
};

/// Finite MDP. transitions[s][a] is empty when a is illegal in s. Terminal
/// states are absorbing with value 0 and no legal actions.
struct MdpModel {
  std::vector<std::string> states;
  std::vector<std::string> observation_keys;
  std::vector<std::string> actions;
  std::vector<std::vector<std::vector<Transition>>> transitions;
  std::vector<bool> terminal;
  double gamma = 0.9;
  std::size_t initial = 0;

  std::size_t num_states() const { return states.size(); }
  std::size_t num_actions() const { return actions.size(); }
  bool legal(std::size_t s, std::size_t a) const { return !transitions[s][a].empty(); }
};

class StateCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Replays a fixed prefix of branch choices and extends it with branch 0,
/// recording each branch point's arity and probabilities. Successive runs
/// walk the whole tree like an odometer.
class BranchEnumerator : public DrawHook {
 public:
  struct Point {
    std::size_t choice = 0;
    std::vector<double> probs;
  };

  bool bernoulli(std::string_view, double p) override {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return take({p, 1.0 - p}) == 0;
  }
  std::size_t index(std::string_view, std::size_t n) override {
    if (n == 1) return 0;
    return take(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }
  double uniform(std::string_view stream) override {
    throw NotEnumerable("continuous draw on stream '" + std::string(stream) +
                        "' cannot be enumerated (green traffic, jitter, or exponential timing)");
  }

  void begin_run() { cursor_ = 0; }

  double path_prob() const {
    double p = 1.0;
    for (std::size_t i = 0; i < cursor_; ++i) p *= points_[i].probs[points_[i].choice];
    return p;
  }

  /// Moves to the next unexplored path; false when the tree is exhausted.
  bool advance() {
    points_.resize(cursor_);
    while (!points_.empty()) {
      auto& last = points_.back();
      if (++last.choice < last.probs.size()) return true;
      points_.pop_back();
    }
    return false;
  }

 private:
  std::size_t take(std::vector<double> probs) {
    if (cursor_ < points_.size()) return points_[cursor_++].choice;
    points_.push_back({0, std::move(probs)});
    ++cursor_;
    return 0;
  }

  std::vector<Point> points_;
  std::size_t cursor_ = 0;
};

}  // namespace detail

/// Enumerates every reachable state of `config` from reset(config.seed) and
/// the exact one-step transition law of each legal action.
///
/// States are identified by Env::state_key(); observation_keys[s] is the
/// flat observation seen in s. Episode ends (termination or a fixed-horizon
/// cut) are not part of the state: termination leads to one absorbing
/// TERMINAL state, and truncation is treated as continuing, matching how the
/// learner bootstraps. Requires fixed_tick sequencing and no continuous draws.
inline MdpModel extract_mdp(const ScenarioConfig& config, std::size_t max_states = 10000) {
  if (config.pomdp.sequence.mode != SequenceMode::fixed_tick) {
    throw std::invalid_argument("extract_mdp needs fixed_tick sequencing");
  }
  if (config.pomdp.horizon.kind == HorizonKind::terminal) {
    for (auto c : config.pomdp.horizon.conditions) {
      if (c == TerminalCondition::max_time) throw std::invalid_argument("extract_mdp cannot encode max_time");
    }
  }
  ScenarioConfig cfg = config;
  // Step-count truncation is not part of the state.
  if (cfg.pomdp.horizon.kind == HorizonKind::fixed) cfg.pomdp.horizon.steps = std::numeric_limits<int>::max();

  Env root(cfg, EnvOptions{false});
  detail::BranchEnumerator reset_hook;
  root.set_draw_hook(&reset_hook);
  reset_hook.begin_run();
  root.reset(cfg.seed);
  if (reset_hook.advance()) throw std::invalid_argument("extract_mdp needs a deterministic initial state");
  root.set_draw_hook(nullptr);

  MdpModel m;
  m.gamma = cfg.pomdp.gamma;
  for (const auto& a : root.actions()) m.actions.push_back(a.name);
  const std::size_t na = m.actions.size();

  std::unordered_map<std::string, std::size_t> index;
  std::vector<Env> envs;
  auto intern = [&](const Env& env) {
    auto key = env.state_key();
    if (auto it = index.find(key); it != index.end()) return it->second;
    if (m.states.size() >= max_states) {
      throw StateCapExceeded("state space exceeds the cap of " + std::to_string(max_states) + " states");
    }
    const auto id = m.states.size();
    index.emplace(key, id);
    m.states.push_back(std::move(key));
    m.observation_keys.push_back(observation_key(env.observation().flat));
    m.terminal.push_back(false);
    m.transitions.emplace_back(na);
    envs.push_back(env);
    return id;
  };
  m.initial = intern(root);

  std::size_t terminal_id = std::numeric_limits<std::size_t>::max();
  auto terminal_state = [&] {
    if (terminal_id == std::numeric_limits<std::size_t>::max()) {
      if (m.states.size() >= max_states) {
        throw StateCapExceeded("state space exceeds the cap of " + std::to_string(max_states) + " states");
      }
      terminal_id = m.states.size();
      m.states.push_back("TERMINAL");
      m.observation_keys.push_back("TERMINAL");
      m.terminal.push_back(true);
      m.transitions.emplace_back(na);
      envs.push_back(root);  // placeholder, never expanded
    }
    return terminal_id;
  };

  for (std::size_t s = 0; s < m.states.size(); ++s) {
    if (m.terminal[s]) continue;
    for (std::size_t a = 0; a < na; ++a) {
      if (!envs[s].is_legal(a)) continue;
      std::map<std::pair<std::size_t, double>, double> outcomes;  // (next, reward) -> prob
      detail::BranchEnumerator hook;
      do {
        Env env = envs[s];
        env.set_draw_hook(&hook);
        hook.begin_run();
        const auto result = env.step(a);
        env.set_draw_hook(nullptr);
        const auto next = result.terminated ? terminal_state() : intern(env);
        outcomes[{next, result.reward}] += hook.path_prob();
      } while (hook.advance());
      auto& row = m.transitions[s][a];
      for (const auto& [key, p] : outcomes) row.push_back({key.first, p, key.second});
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// value iteration

/// Q(s, a) for legal pairs; NaN marks illegal actions and terminal states.
using QMatrix = std::vector<std::vector<double>>;

namespace detail {

inline double state_value(const MdpModel& m, const QMatrix& q, std::size_t s) {
  if (m.terminal[s]) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m.num_actions(); ++a) {
    if (m.legal(s, a)) best = std::max(best, q[s][a]);
  }
  return std::isinf(best) ? 0.0 : best;
}

inline QMatrix bellman_backup(const MdpModel& m, const QMatrix& q) {
  QMatrix out(m.num_states(), std::vector<double>(m.num_actions(), std::nan("")));
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      if (!m.legal(s, a)) continue;
      double v = 0.0;
      for (const auto& t : m.transitions[s][a]) v += t.prob * (t.reward + m.gamma * state_value(m, q, t.next));
      out[s][a] = v;
    }
  }
  return out;
}

}  // namespace detail

/// sup over legal (s, a) of |(TQ)(s, a) - Q(s, a)|.
inline double bellman_residual(const MdpModel& m, const QMatrix& q) {
  const auto tq = detail::bellman_backup(m, q);
  double r = 0.0;
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      if (m.legal(s, a)) r = std::max(r, std::abs(tq[s][a] - q[s][a]));
    }
  }
  return r;
}

class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Synchronous value iteration on Q. Stops once an update moves no entry by
/// more than tol, which bounds the returned table's Bellman residual by
/// gamma * tol <= tol.
inline QMatrix value_iteration(const MdpModel& m, double tol = 1e-10, std::size_t max_iter = 100000) {
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  QMatrix q(m.num_states(), std::vector<double>(m.num_actions(), 0.0));
  for (std::size_t s = 0; s < m.num_states(); ++s) {
    for (std::size_t a = 0; a < m.num_actions(); ++a) {
      if (!m.legal(s, a)) q[s][a] = std::nan("");
    }
  }
  for (std::size_t it = 0; it < max_iter; ++it) {
    auto next = detail::bellman_backup(m, q);
    double delta = 0.0;
    for (std::size_t s = 0; s < m.num_states(); ++s) {
      for (std::size_t a = 0; a < m.num_actions(); ++a) {
        if (m.legal(s, a)) delta = std::max(delta, std::abs(next[s][a] - q[s][a]));
      }
    }
    q = std::move(next);
    if (delta <= tol) return q;
  }
  throw NotConverged("value iteration did not converge within " + std::to_string(max_iter) + " iterations");
}

// ---------------------------------------------------------------------------
// tabular Q

/// Q-values and visit counts keyed by observation key.
class QTable {
 public:
  explicit QTable(std::size_t num_actions = 0, double initial = 0.0)
      : num_actions_(num_actions), initial_(initial) {}

  std::size_t num_actions() const noexcept { return num_actions_; }
  double initial_value() const noexcept { return initial_; }

  double value(const std::string& key, std::size_t a) const {
    auto it = rows_.find(key);
    return it == rows_.end() ? initial_ : it->second.q.at(a);
  }
  std::size_t visits(const std::string& key, std::size_t a) const {
    auto it = rows_.find(key);
    return it == rows_.end() ? 0 : it->second.n.at(a);
  }
  double& at(const std::string& key, std::size_t a) { return row(key).q.at(a); }
  std::size_t& visit_count(const std::string& key, std::size_t a) { return row(key).n.at(a); }

  /// Highest-valued legal action; ties go to the lowest index.
  std::size_t greedy(const std::string& key, const std::vector<bool>& mask) const {
    std::size_t best = mask.size();
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < mask.size(); ++a) {
      if (!mask[a]) continue;
      const double v = value(key, a);
      if (best == mask.size() || v > best_v) {
        best = a;
        best_v = v;
      }
    }
    if (best == mask.size()) throw std::invalid_argument("mask has no legal action");
    return best;
  }

  double max_legal(const std::string& key, const std::vector<bool>& mask) const {
    return value(key, greedy(key, mask));
  }

  /// Keys with their rows, in key order.
  template <typename Fn>
  void for_each(Fn fn) const {
    for (const auto& [k, r] : rows_) fn(k, r.q, r.n);
  }
  std::size_t size() const noexcept { return rows_.size(); }

  /// Text form: a header line, then one `key<TAB>action<TAB>value` line per
  /// entry, keys sorted, values in shortest round-trip notation.
  void write(std::ostream& out) const {
    out << "# acdsim-qtable actions=" << num_actions_ << " initial=" << format_double(initial_) << '\n';
    for (const auto& [k, r] : rows_) {
      for (std::size_t a = 0; a < num_actions_; ++a) out << k << '\t' << a << '\t' << format_double(r.q[a]) << '\n';
    }
  }

  static QTable read(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("# acdsim-qtable ", 0) != 0) {
      throw std::runtime_error("not a Q-table file (missing header)");
    }
    std::size_t n = 0;
    double init = 0.0;
    if (std::sscanf(header.c_str(), "# acdsim-qtable actions=%zu initial=%lf", &n, &init) != 2) {
      throw std::runtime_error("malformed Q-table header: " + header);
    }
    QTable t(n, init);
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto p1 = line.find('\t');
      const auto p2 = line.find('\t', p1 == std::string::npos ? p1 : p1 + 1);
      if (p1 == std::string::npos || p2 == std::string::npos) {
        throw std::runtime_error("malformed Q-table line " + std::to_string(lineno));
      }
      const auto a = std::stoul(line.substr(p1 + 1, p2 - p1 - 1));
      if (a >= n) throw std::runtime_error("action index out of range on line " + std::to_string(lineno));
      t.at(line.substr(0, p1), a) = std::stod(line.substr(p2 + 1));
    }
    return t;
  }

  bool operator==(const QTable& o) const {
    if (num_actions_ != o.num_actions_ || initial_ != o.initial_ || rows_.size() != o.rows_.size()) return false;
    for (const auto& [k, r] : rows_) {
      auto it = o.rows_.find(k);
      if (it == o.rows_.end() || it->second.q != r.q) return false;
    }
    return true;
  }

 private:
  struct Row {
    std::vector<double> q;
    std::vector<std::size_t> n;
  };
  Row& row(const std::string& key) {
    auto it = rows_.find(key);
    if (it == rows_.end()) {
      it = rows_.emplace(key, Row{std::vector<double>(num_actions_, initial_),
                                  std::vector<std::size_t>(num_actions_, 0)})
               .first;
    }
    return it->second;
  }

  std::size_t num_actions_ = 0;
  double initial_ = 0.0;
  std::map<std::string, Row> rows_;
};

struct AlphaSchedule {
  enum class Kind { constant, inverse_visits } kind = Kind::inverse_visits;
  double value = 1.0;     // constant step size, or the numerator
  double exponent = 0.5;  // inverse_visits: value / n^exponent

  double at(std::size_t visits) const {
    if (kind == Kind::constant) return value;
    return std::min(1.0, value / std::pow(static_cast<double>(std::max<std::size_t>(visits, 1)), exponent));
  }
};

struct EpsilonSchedule {
  // Defaults to pure exploration: Q-learning is off-policy, and uniform
  // behaviour gives every reachable pair many updates.
  enum class Kind { constant, linear_decay } kind = Kind::constant;
  double start = 1.0;
  double end = 0.1;
  std::size_t decay_episodes = 10000;  // linear_decay reaches `end` here

  double at(std::size_t episode) const {
    if (kind == Kind::constant || decay_episodes == 0) return kind == Kind::constant ? start : end;
    const double f = std::min(1.0, static_cast<double>(episode) / static_cast<double>(decay_episodes));
    return start + (end - start) * f;
  }
};

struct QLearningParams {
  std::size_t episodes = 20000;
  std::uint64_t seed = 0;
  AlphaSchedule alpha;
  EpsilonSchedule epsilon;
  double initial_q = 0.0;
  // Step cap for horizons that may not end on their own.
  std::size_t max_steps = 0;  // 0: the scenario's own horizon or eval_window
};

namespace detail {

using PolicyRng = std::mt19937_64;

inline std::size_t uniform_legal(const std::vector<bool>& mask, PolicyRng& rng) {
  std::vector<std::size_t> legal;
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (mask[a]) legal.push_back(a);
  }
  if (legal.empty()) throw std::invalid_argument("mask has no legal action");
  return legal[scale_index(unit_interval(rng()), legal.size())];
}

inline std::size_t episode_step_cap(const ScenarioConfig& cfg, std::size_t override_cap) {
  if (override_cap > 0) return override_cap;
  const auto& h = cfg.pomdp.horizon;
  if (h.kind == HorizonKind::fixed) return static_cast<std::size_t>(h.steps);
  return static_cast<std::size_t>(h.eval_window);
}

}  // namespace detail

/// One-step Q-learning over observation keys with mask-aware epsilon-greedy
/// exploration. Episode k resets with episode_seed(seed, k); the agent's own
/// draws come from a generator seeded by stream_seed(seed, "agent").
///
/// Target: r on termination, else r + gamma * max over next-legal Q. A
/// fixed-horizon cut is not a real ending, so it bootstraps too.
inline QTable train_q_learning(Env& env, const QLearningParams& params) {
  const auto& cfg = env.config();
  const double gamma = cfg.pomdp.gamma;
  QTable q(env.actions().size(), params.initial_q);
  detail::PolicyRng rng(stream_seed(params.seed, "agent"));
  const auto cap = detail::episode_step_cap(cfg, params.max_steps);

  for (std::size_t ep = 0; ep < params.episodes; ++ep) {
    const double eps = params.epsilon.at(ep);
    auto obs = env.reset(episode_seed(params.seed, ep));
    auto key = observation_key(obs.flat);
    auto mask = env.legal_action_mask();
    for (std::size_t t = 0; t < cap; ++t) {
      const bool explore = unit_interval(rng()) < eps;
      const auto a = explore ? detail::uniform_legal(mask, rng) : q.greedy(key, mask);
      const auto res = env.step(a);
      auto next_key = observation_key(res.obs.flat);
      auto next_mask = env.legal_action_mask();
      double target = res.reward;
      if (!res.terminated) target += gamma * q.max_legal(next_key, next_mask);
      auto& n = q.visit_count(key, a);
      ++n;
      auto& v = q.at(key, a);
      v += params.alpha.at(n) * (target - v);
      if (res.terminated || res.truncated) break;
      key = std::move(next_key);
      mask = std::move(next_mask);
    }
  }
  return q;
}

// ---------------------------------------------------------------------------
// policies

struct RandomPolicy {};
/// Restores the first host observed as compromised, else passes.
struct HeuristicPolicy {};
struct GreedyQPolicy {
  QTable table;
};
/// Plays sequence[step_index]; the position comes from the observation so the
/// policy itself stays immutable.
struct ScriptedPolicy {
  std::vector<std::size_t> sequence;
};
using Policy = std::variant<RandomPolicy, HeuristicPolicy, GreedyQPolicy, ScriptedPolicy>;

inline std::string policy_name(const Policy& p) {
  switch (p.index()) {
    case 0: return "random";
    case 1: return "heuristic";
    case 2: return "greedy_q";
    default: return "scripted";
  }
}

/// Resolves action names ("pass", "restore(ws)") to ids.
inline ScriptedPolicy make_scripted(const std::vector<std::string>& names,
                                    const std::vector<ActionInstance>& actions) {
  ScriptedPolicy p;
  for (const auto& n : names) {
    auto it = std::find_if(actions.begin(), actions.end(), [&](const ActionInstance& a) { return a.name == n; });
    if (it == actions.end()) throw std::invalid_argument("unknown action in script: " + n);
    p.sequence.push_back(static_cast<std::size_t>(it - actions.begin()));
  }
  return p;
}

inline std::size_t policy_action(const Policy& policy, const Observation& obs, const std::vector<bool>& mask,
                                 const std::vector<ActionInstance>& actions, detail::PolicyRng& rng) {
  if (std::find(mask.begin(), mask.end(), true) == mask.end()) {
    throw std::invalid_argument("mask has no legal action");
  }
  return std::visit(
      [&](const auto& p) -> std::size_t {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, RandomPolicy>) {
          return detail::uniform_legal(mask, rng);
        } else if constexpr (std::is_same_v<P, HeuristicPolicy>) {
          std::size_t pass = mask.size();
          for (std::size_t a = 0; a < actions.size(); ++a) {
            if (actions[a].kind == ActionKind::pass) pass = a;
          }
          for (const auto& rec : obs.factored) {
            if (!rec.detected_compromise) continue;
            for (std::size_t a = 0; a < actions.size(); ++a) {
              const auto& act = actions[a];
              if (act.kind == ActionKind::restore && act.host && obs.factored[*act.host].host_id == rec.host_id &&
                  mask[a]) {
                return a;
              }
            }
            break;
          }
          return pass;
        } else if constexpr (std::is_same_v<P, GreedyQPolicy>) {
          return p.table.greedy(observation_key(obs.flat), mask);
        } else {
          if (obs.step_index >= p.sequence.size()) {
            throw std::out_of_range("scripted sequence exhausted at step " + std::to_string(obs.step_index));
          }
          const auto a = p.sequence[obs.step_index];
          if (a >= mask.size() || !mask[a]) {
            throw InvalidAction("scripted action is masked at step " + std::to_string(obs.step_index) + ": " +
                                (a < actions.size() ? actions[a].name : std::to_string(a)));
          }
          return a;
        }
      },
      policy);
}

}  // namespace acdsim
