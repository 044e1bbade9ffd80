#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace acdsim;
using acdsim::testing::action_spec;
using acdsim::testing::load_mvp;
using acdsim::testing::load_oracle;
using acdsim::testing::random_scenario;
using acdsim::testing::small_config;

namespace {

std::size_t action_id(const Env& env, const std::string& name) {
  for (std::size_t i = 0; i < env.actions().size(); ++i) {
    if (env.actions()[i].name == name) return i;
  }
  throw std::out_of_range(name);
}

ActionInstance instance(ActionKind kind, double cost) {
  ActionInstance a;
  a.kind = kind;
  a.cost = cost;
  return a;
}

TruthRecord truth_with(std::vector<Compromise> levels) {
  TruthRecord t;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    HostTruth h;
    h.id = "h" + std::to_string(i);
    h.compromise = levels[i];
    t.hosts.push_back(h);
  }
  return t;
}

// Trace without sequence numbers, which depend on wake-up bookkeeping.
std::vector<std::string> timeline(const std::vector<AppliedEvent>& trace) {
  std::vector<std::string> out;
  for (const auto& a : trace) {
    if (a.event.kind == EventKind::service_tick) continue;
    out.push_back(format_double(a.event.timestamp) + " " + std::string(to_string(a.event.source)) + " " +
                  std::string(to_string(a.event.kind)) + " " + a.event.subject + " " +
                  std::string(to_string(a.status)));
  }
  return out;
}

}  // namespace

TEST(Actions, ExpansionOrderAndNames) {
  Env env(load_mvp());
  std::vector<std::string> names;
  for (const auto& a : env.actions()) names.push_back(a.name);
  EXPECT_EQ(names, (std::vector<std::string>{"pass", "scan(ws)", "scan(srv)", "restore(ws)", "restore(srv)",
                                             "quarantine(ws)", "quarantine(srv)", "release(ws)", "release(srv)"}));
  EXPECT_EQ(env.pass_action(), 0u);
}

TEST(Reset, RealisticInitialObservationIsZero) {
  Env env(load_mvp());
  const auto obs = env.reset(7);
  EXPECT_EQ(obs.flat, std::vector<double>(4, 0.0));
  EXPECT_EQ(obs.step_index, 0u);
  EXPECT_EQ(obs.last_action_feedback, ActionFeedback::none);
  Env again(load_mvp());
  EXPECT_EQ(again.reset(7), obs);
}

TEST(Reset, OracleSeesInitialCompromise) {
  auto c = load_oracle();
  c.topology.hosts[0].initial_compromise = Compromise::user;
  c.pomdp.sensor.fields = {Feature::detected_compromise};
  Env env(c);
  const auto obs = env.reset(1);
  EXPECT_TRUE(obs.factored[0].detected_compromise);
  EXPECT_EQ(obs.flat, (std::vector<double>{1.0, 0.0}));
}

TEST(Layout, NamesFollowHostsThenCanonicalFields) {
  auto c = load_mvp();
  c.pomdp.sensor.fields = {Feature::quarantined, Feature::role, Feature::alert_count};
  EXPECT_EQ(observation_layout(c),
            (std::vector<std::string>{"ws.role.workstation", "ws.role.server", "ws.role.critical_server",
                                      "ws.alert_count", "ws.quarantined", "srv.role.workstation", "srv.role.server",
                                      "srv.role.critical_server", "srv.alert_count", "srv.quarantined"}));
}

TEST(Mask, InitialStateAllowsOnlyPassAndScan) {
  Env env(load_mvp());
  EXPECT_EQ(env.legal_action_mask(),
            (std::vector<bool>{true, false, false, false, false, false, false, false, false}));
  env.reset(7);
  EXPECT_EQ(env.legal_action_mask(),
            (std::vector<bool>{true, true, true, false, false, false, false, false, false}));
}

TEST(Mask, DetectionAndQuarantineDriveLegality) {
  Env env(load_mvp());
  env.reset(7);
  env.step(0);
  env.step(0);  // ws exploited at 120 s, detected at once
  ASSERT_TRUE(env.observation().factored[0].detected_compromise);
  EXPECT_TRUE(env.is_legal(action_id(env, "restore(ws)")));
  EXPECT_TRUE(env.is_legal(action_id(env, "quarantine(ws)")));
  EXPECT_FALSE(env.is_legal(action_id(env, "restore(srv)")));
  env.step(action_id(env, "quarantine(ws)"));
  EXPECT_TRUE(env.observation().factored[0].quarantined);
  EXPECT_FALSE(env.is_legal(action_id(env, "quarantine(ws)")));
  EXPECT_TRUE(env.is_legal(action_id(env, "release(ws)")));
}

TEST(Mask, EverythingButPassWaitsForAnActionInProgress) {
  auto c = load_mvp();
  c.pomdp.actions[1].duration = 150.0;  // scan outlasts the 60 s tick
  Env env(c);
  env.reset(7);
  auto r = env.step(action_id(env, "scan(ws)"));
  EXPECT_EQ(r.info.feedback, ActionFeedback::in_progress);
  const auto mask = env.legal_action_mask();
  EXPECT_TRUE(mask[0]);
  for (std::size_t i = 1; i < mask.size(); ++i) EXPECT_FALSE(mask[i]);
  env.step(0);
  r = env.step(0);
  EXPECT_EQ(r.info.feedback, ActionFeedback::succeeded);
}

TEST(Mask, StrictModeThrows) {
  Env env(load_mvp());
  EXPECT_THROW(env.step(0), std::logic_error);
  env.reset(1);
  EXPECT_THROW(env.step(99), InvalidAction);
  try {
    env.step(action_id(env, "restore(ws)"));
    FAIL();
  } catch (const InvalidAction& e) {
    EXPECT_STREQ(e.what(), "masked action: restore(ws)");
  }
}

TEST(Mask, LenientModeRunsPassAndFlags) {
  auto c = load_mvp();
  c.pomdp.lenient_mask = true;
  Env env(c);
  env.reset(3);
  Env twin = env;
  const auto masked = env.step(action_id(env, "release(srv)"));
  const auto pass = twin.step(0);
  EXPECT_TRUE(masked.info.masked_action);
  EXPECT_FALSE(pass.info.masked_action);
  EXPECT_EQ(masked.reward, pass.reward);
  EXPECT_EQ(masked.obs, pass.obs);
  EXPECT_EQ(env.state_key(), twin.state_key());
}

TEST(Reward, DefaultConstantsComposeDirectly) {
  RewardConfig dense;
  EXPECT_EQ(compute_reward(truth_with({Compromise::none, Compromise::none}), instance(ActionKind::pass, 0.1), dense,
                           false),
            0.1);
  // restore cost plus one compromised host at window end
  EXPECT_DOUBLE_EQ(
      compute_reward(truth_with({Compromise::user, Compromise::none}), instance(ActionKind::restore, -1.0), dense,
                     false),
      -1.0 + -2.0);
  // the compromise term on its own, under a zero-cost action
  EXPECT_EQ(compute_reward(truth_with({Compromise::root}), instance(ActionKind::scan, 0.0), dense, false), -2.0);

  dense.role_weights[Role::workstation] = 0.5;
  EXPECT_EQ(compute_reward(truth_with({Compromise::root}), instance(ActionKind::scan, 0.0), dense, false), -1.0);
}

TEST(Reward, SparseOnlyOnTerminalImpact) {
  RewardConfig sparse;
  sparse.kind = RewardKind::sparse;
  auto t = truth_with({Compromise::root});
  t.hosts[0].role = Role::critical_server;
  t.hosts[0].impacted = true;
  EXPECT_EQ(compute_reward(t, instance(ActionKind::pass, 0.1), sparse, false), 0.0);
  EXPECT_EQ(compute_reward(t, instance(ActionKind::pass, 0.1), sparse, true), -10.0);
  t.hosts[0].impacted = false;
  EXPECT_EQ(compute_reward(t, instance(ActionKind::pass, 0.1), sparse, true), 0.0);
}

TEST(Reward, OptimalStopping) {
  RewardConfig os;
  os.kind = RewardKind::optimal_stopping;
  const auto clean = truth_with({Compromise::none});
  const auto intruded = truth_with({Compromise::user});
  EXPECT_EQ(compute_reward(clean, instance(ActionKind::stop, 0), os, true), -5.0);
  EXPECT_EQ(compute_reward(intruded, instance(ActionKind::stop, 0), os, true), 0.0);
  EXPECT_EQ(compute_reward(intruded, instance(ActionKind::pass, 0), os, false), -1.0);
  EXPECT_EQ(compute_reward(clean, instance(ActionKind::pass, 0), os, false), 0.0);
}

TEST(Step, PassWithoutRedActivityEarnsTheBonus) {
  auto c = load_mvp();
  c.red.enabled = false;
  Env env(c);
  env.reset(1);
  EXPECT_EQ(env.step(0).reward, 0.1);
}

TEST(Step, RestoringTheOnlyCompromisedHost) {
  auto c = small_config(1);
  c.red.enabled = false;
  c.topology.hosts[0].initial_compromise = Compromise::user;
  c.pomdp.sensor.mode = SensorMode::omniscient_oracle;
  Env env(c);
  env.reset(1);
  EXPECT_EQ(env.step(action_id(env, "restore(h0)")).reward, -1.0);
  EXPECT_EQ(env.truth().hosts[0].compromise, Compromise::none);
}

TEST(Step, FailedActionLeavesStateAndReportsFailure) {
  auto c = small_config(1);
  c.red.enabled = false;
  c.topology.hosts[0].initial_compromise = Compromise::user;
  c.pomdp.sensor.mode = SensorMode::omniscient_oracle;
  c.pomdp.actions[2].success_prob = 0.0;
  Env env(c);
  env.reset(1);
  const auto r = env.step(action_id(env, "restore(h0)"));
  EXPECT_EQ(r.info.feedback, ActionFeedback::failed);
  EXPECT_EQ(r.obs.last_action_feedback, ActionFeedback::failed);
  EXPECT_EQ(env.truth().hosts[0].compromise, Compromise::user);
}

TEST(Step, SuccessPatternReplaysTheBlueStream) {
  auto c = small_config(1);
  c.red.enabled = false;
  c.pomdp.actions[1].success_prob = 0.5;
  const std::uint64_t seed = 99;
  Env env(c);
  env.reset(seed);
  std::mt19937_64 blue(stream_seed(seed, "blue"));
  for (int i = 0; i < 10; ++i) {
    const bool expected = unit_interval(blue()) < 0.5;
    const auto r = env.step(action_id(env, "scan(h0)"));
    EXPECT_EQ(r.info.feedback, expected ? ActionFeedback::succeeded : ActionFeedback::failed) << "repeat " << i;
  }
}

TEST(Step, ReportDelayDefersTheDetectionBit) {
  auto c = small_config(2);
  c.red.start_time = 0.0;
  c.red.stage_delays = {10.0, 1000.0, 1000.0, 1000.0};
  c.pomdp.sensor.report_delay = 90.0;
  Env env(c);
  env.reset(1);
  // exploit of h0 lands at 10 s; its alert arrives at 100 s
  auto r = env.step(0);
  EXPECT_EQ(env.truth().hosts[0].compromise, Compromise::user);
  EXPECT_FALSE(r.obs.factored[0].detected_compromise);
  r = env.step(0);
  int bits = 0;
  for (const auto& rec : r.obs.factored) bits += rec.detected_compromise;
  EXPECT_EQ(bits, 1);
  EXPECT_TRUE(r.obs.factored[0].detected_compromise);
}

TEST(Step, ActionDurationWindowsEndAtCompletion) {
  auto c = load_mvp();
  c.pomdp.sequence.mode = SequenceMode::action_duration;
  c.pomdp.actions[0].duration = 45.0;
  c.pomdp.actions[1].duration = 20.0;
  Env env(c);
  env.reset(2);
  auto r = env.step(0);
  EXPECT_EQ(r.info.window_end, 45.0);
  r = env.step(action_id(env, "scan(ws)"));
  EXPECT_EQ(r.info.window_start, 45.0);
  EXPECT_EQ(r.info.window_end, 65.0);
  EXPECT_EQ(r.info.feedback, ActionFeedback::succeeded);
}

TEST(Step, FlatIsTheFlatteningOfFactored) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = random_scenario(rng);
    Env env(c);
    env.reset(trial);
    std::mt19937_64 pol(trial);
    for (int i = 0; i < 20 && !env.episode_done(); ++i) {
      const auto mask = env.legal_action_mask();
      std::vector<std::size_t> legal;
      for (std::size_t a = 0; a < mask.size(); ++a) {
        if (mask[a]) legal.push_back(a);
      }
      const auto r = env.step(legal[pol() % legal.size()]);
      ASSERT_EQ(r.obs.flat, flatten(r.obs.factored, c.pomdp.sensor.fields));
      ASSERT_EQ(r.obs.flat.size(), env.layout().size());
    }
  }
}

TEST(Step, PermutingHostsPermutesRecords) {
  auto c = load_mvp();
  auto swapped = c;
  std::swap(swapped.topology.hosts[0], swapped.topology.hosts[1]);
  Env a(c), b(swapped);
  a.reset(5);
  b.reset(5);
  for (int i = 0; i < 8; ++i) {
    const auto ra = a.step(0);
    const auto rb = b.step(0);
    ASSERT_EQ(ra.obs.factored[0], rb.obs.factored[1]);
    ASSERT_EQ(ra.obs.factored[1], rb.obs.factored[0]);
  }
}

TEST(Step, SuccessfulActionsAreObservable) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = random_scenario(rng);
    Env env(c);
    env.reset(trial);
    std::mt19937_64 pol(trial);
    for (int i = 0; i < 25 && !env.episode_done(); ++i) {
      const auto mask = env.legal_action_mask();
      std::vector<std::size_t> legal;
      for (std::size_t a = 0; a < mask.size(); ++a) {
        if (mask[a]) legal.push_back(a);
      }
      const auto a = legal[pol() % legal.size()];
      const auto r = env.step(a);
      // A blue completion always surfaces in the feedback field.
      for (const auto& ev : env.window_events()) {
        if (ev.event.source == Actor::blue) {
          EXPECT_NE(r.info.feedback, ActionFeedback::none);
          EXPECT_NE(r.info.feedback, ActionFeedback::in_progress);
        }
      }
    }
  }
}

TEST(Horizon, FixedTruncatesAtN) {
  auto c = load_mvp();
  c.pomdp.horizon.steps = 5;
  Env env(c);
  env.reset(1);
  for (int i = 1; i <= 5; ++i) {
    const auto r = env.step(0);
    EXPECT_FALSE(r.terminated);
    EXPECT_EQ(r.truncated, i == 5);
  }
  EXPECT_THROW(env.step(0), std::logic_error);
  env.reset(2);
  EXPECT_NO_THROW(env.step(0));
}

TEST(Horizon, TerminalEndsOnCriticalImpact) {
  auto c = load_mvp();
  c.pomdp.horizon.kind = HorizonKind::terminal;
  c.pomdp.horizon.conditions = {TerminalCondition::critical_impacted};
  Env env(c);
  env.reset(1);
  int steps = 0;
  StepResult r;
  do {
    r = env.step(0);
    ++steps;
    EXPECT_FALSE(r.truncated);
  } while (!r.terminated && steps < 50);
  EXPECT_TRUE(r.terminated);
  EXPECT_EQ(steps, 6);  // impact lands at 360 s
}

TEST(Horizon, StopTerminatesWithoutAdvancingTime) {
  auto c = small_config(1);
  c.pomdp.reward.kind = RewardKind::optimal_stopping;
  c.pomdp.actions = {action_spec(ActionKind::pass), action_spec(ActionKind::stop)};
  Env env(c);
  env.reset(1);
  env.step(0);
  const auto r = env.step(1);
  EXPECT_TRUE(r.terminated);
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(r.info.window_start, r.info.window_end);
}

TEST(Interleaving, TurnBasedMatchesConcurrentWhenAligned) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto c = load_mvp();
    c.green.default_rate = 0.0;
    const double d = 60.0 * static_cast<double>(1 + rng() % 3);
    c.red.stage_delays = {d, d, d, d};
    c.red.start_time = 60.0 * static_cast<double>(rng() % 3);
    auto turn = c;
    turn.pomdp.interleaving.mode = Interleaving::turn_based;
    Env a(c), b(turn);
    a.reset(trial);
    b.reset(trial);
    std::mt19937_64 pol(trial);
    for (int i = 0; i < 30; ++i) {
      const auto mask = a.legal_action_mask();
      ASSERT_EQ(mask, b.legal_action_mask());
      std::vector<std::size_t> legal;
      for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k]) legal.push_back(k);
      }
      const auto act = legal[pol() % legal.size()];
      ASSERT_EQ(a.step(act).reward, b.step(act).reward);
    }
    EXPECT_EQ(timeline(a.trace()), timeline(b.trace()));
  }
}

TEST(Validation, EnvRejectsInvalidConfig) {
  auto c = load_mvp();
  c.pomdp.gamma = 1.5;
  EXPECT_THROW(Env{c}, ScenarioError);
}
