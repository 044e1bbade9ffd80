// acdsim command-line front end: validate, run, train, eval, serve.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "acdsim/acdsim.hpp"
#include "acdsim/protocol_tcp.hpp"

namespace {

using namespace acdsim;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const auto v = std::stoull(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad seed: " + item);
    seeds.push_back(v);
  }
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  return seeds;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(b, e - b + 1));
  }
  return out;
}

Policy make_policy(const std::string& spec, const Env& env) {
  if (spec == "random") return RandomPolicy{};
  if (spec == "heuristic") return HeuristicPolicy{};
  if (spec.rfind("scripted:", 0) == 0) return make_scripted(read_lines(spec.substr(9)), env.actions());
  if (spec.rfind("qtable:", 0) == 0) {
    std::ifstream in(spec.substr(7));
    if (!in) throw std::runtime_error("cannot open " + spec.substr(7));
    return GreedyQPolicy{QTable::read(in)};
  }
  throw std::invalid_argument("unknown policy '" + spec + "' (random, heuristic, scripted:<file>, qtable:<file>)");
}

// key=value settings for Q-learning.
QLearningParams parse_q_params(const std::vector<std::string>& items) {
  QLearningParams p;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got '" + item + "'");
    const auto key = item.substr(0, eq);
    const auto val = item.substr(eq + 1);
    if (key == "episodes") {
      p.episodes = std::stoull(val);
    } else if (key == "seed") {
      p.seed = std::stoull(val);
    } else if (key == "alpha") {
      p.alpha.kind = AlphaSchedule::Kind::constant;
      p.alpha.value = std::stod(val);
    } else if (key == "alpha_exponent") {
      p.alpha.kind = AlphaSchedule::Kind::inverse_visits;
      p.alpha.exponent = std::stod(val);
    } else if (key == "epsilon") {
      p.epsilon.kind = EpsilonSchedule::Kind::constant;
      p.epsilon.start = std::stod(val);
    } else if (key == "epsilon_end") {
      p.epsilon.kind = EpsilonSchedule::Kind::linear_decay;
      p.epsilon.end = std::stod(val);
    } else if (key == "epsilon_decay") {
      p.epsilon.decay_episodes = std::stoull(val);
    } else if (key == "initial_q") {
      p.initial_q = std::stod(val);
    } else if (key == "max_steps") {
      p.max_steps = std::stoull(val);
    } else {
      throw std::invalid_argument("unknown Q-learning parameter '" + key + "'");
    }
  }
  return p;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("acdsim");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("ACDSIM_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("ACDSIM_LOG='{}' is not a log level; keeping 'warn'", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"acdsim: network-defence simulator"};
  app.require_subcommand(1);

  std::string file;
  std::string policy = "random";
  std::string seeds_text = "0";
  std::size_t episodes = 10;
  std::string out_path;
  std::string algo = "q";
  std::vector<std::string> params;
  std::string qtable_path;
  std::string baseline = "random";
  std::string format = "text";
  std::string transport = "stdio";
  bool test_profile = false;

  auto* validate = app.add_subcommand("validate", "Check a scenario file and report every problem");
  validate->add_option("file", file, "Scenario file")->required();

  auto* run = app.add_subcommand("run", "Run a policy over seeds and episodes");
  run->add_option("file", file, "Scenario file")->required();
  run->add_option("--policy", policy, "random | heuristic | scripted:<file> | qtable:<file>");
  run->add_option("--seeds", seeds_text, "Comma-separated seeds");
  run->add_option("--episodes", episodes, "Episodes per seed");
  run->add_option("--out", out_path, "Per-episode CSV output");

  auto* train = app.add_subcommand("train", "Train a tabular learner");
  train->add_option("file", file, "Scenario file")->required();
  train->add_option("--algo", algo, "Learning algorithm")->check(CLI::IsMember({"q"}));
  train->add_option("--params", params, "key=value settings (episodes, seed, alpha, epsilon, ...)");
  train->add_option("--out", out_path, "Q-table output")->required();

  auto* eval = app.add_subcommand("eval", "Compare a trained Q-table against a baseline");
  eval->add_option("file", file, "Scenario file")->required();
  eval->add_option("--qtable", qtable_path, "Q-table file")->required();
  eval->add_option("--baseline", baseline, "Baseline policy");
  eval->add_option("--seeds", seeds_text, "Comma-separated seeds");
  eval->add_option("--episodes", episodes, "Episodes per seed");
  eval->add_option("--format", format, "text | csv")->check(CLI::IsMember({"text", "csv"}));

  auto* serve = app.add_subcommand("serve", "Serve the JSON line protocol");
  serve->add_option("file", file, "Scenario file")->required();
  serve->add_option("--transport", transport, "stdio | tcp:<port>");
  serve->add_flag("--test-profile", test_profile, "Allow the omniscient sensor");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = load_scenario(file);
    spdlog::info("loaded scenario '{}' ({})", config.metadata.name, scenario_hash(config));

    if (*validate) {
      std::cout << "ok: " << config.metadata.name << " (" << scenario_hash(config) << ")\n";
      return 0;
    }

    if (*run) {
      Env env(config);
      const auto p = make_policy(policy, env);
      const auto summary = run_episodes(p, config, parse_seeds(seeds_text), episodes);
      if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        write_episode_csv(summary, out);
      }
      std::cout << summary_json(summary).dump(2) << '\n';
      return 0;
    }

    if (*train) {
      const auto p = parse_q_params(params);
      spdlog::info("training Q-learning for {} episodes, seed {}", p.episodes, p.seed);
      Env env(config, EnvOptions{false});
      const auto table = train_q_learning(env, p);
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot write " + out_path);
      table.write(out);
      spdlog::info("wrote {} observation rows to {}", table.size(), out_path);
      return 0;
    }

    if (*eval) {
      Env env(config);
      const auto seeds = parse_seeds(seeds_text);
      const auto learned = run_episodes(make_policy("qtable:" + qtable_path, env), config, seeds, episodes);
      const auto base = run_episodes(make_policy(baseline, env), config, seeds, episodes);
      const auto report = compare_policies(learned, base);
      std::cout << (format == "csv" ? report_csv(report) : report_text(report));
      return 0;
    }

    if (*serve) {
      ProtocolOptions options;
      options.test_profile = test_profile;
      if (transport == "stdio") {
        serve_stream(config, std::cin, std::cout, options);
        return 0;
      }
      if (transport.rfind("tcp:", 0) == 0) {
        const auto port = std::stoul(transport.substr(4));
        if (port > 65535) throw std::invalid_argument("port out of range");
        TcpServer server(config, static_cast<unsigned short>(port), options);
        spdlog::warn("listening on 127.0.0.1:{}", server.port());
        server.run();
        return 0;
      }
      throw std::invalid_argument("unknown transport '" + transport + "' (stdio, tcp:<port>)");
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
