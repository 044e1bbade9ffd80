// Loads the two-host scenario, plays the alert-driven heuristic for one
// episode, and prints each step.

#include <cstdio>

#include "acdsim/acdsim.hpp"

int main() {
  using namespace acdsim;
  const auto config = load_scenario(std::string(ACDSIM_SCENARIOS) + "/mvp-2host.yaml");
  Env env(config);
  detail::PolicyRng rng(0);
  auto obs = env.reset(config.seed);
  double total = 0.0;
  while (!env.episode_done()) {
    const auto a = policy_action(HeuristicPolicy{}, obs, env.legal_action_mask(), env.actions(), rng);
    const auto r = env.step(a);
    total += r.reward;
    std::printf("step %2zu  t=%4.0fs  %-15s reward %5.1f  obs %s\n", r.info.step_index, r.info.window_end,
                env.actions()[a].name.c_str(), r.reward, observation_key(r.obs.flat).c_str());
    obs = r.obs;
  }
  std::printf("return %.1f\n", total);
}
