// Command-line front end: train, eval, compare-rewards, gradcheck,
// oracle-check, replay.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "formation/config.hpp"
#include "formation/eval.hpp"
#include "formation/learner.hpp"
#include "formation/oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitPropertyFailed = 2;

using namespace formation;

RunConfig config_from(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

int cmd_train(const std::string& config_path, const std::string& model,
              const std::string& out, std::uint64_t seed,
              std::int64_t episodes, const std::string& stats_override) {
  RunConfig cfg = config_from(config_path);
  cfg.train.model_kind = parse_model_kind(model);
  cfg.train.rng_seed = seed;
  if (episodes >= 0) cfg.train.episodes = episodes;
  cfg.task.model_kind = cfg.train.model_kind;
  const std::string stats_path = !stats_override.empty() ? stats_override
                                 : !cfg.stats_path.empty() ? cfg.stats_path
                                                           : out + ".stats.csv";
  std::ofstream stats(stats_path, std::ios::binary);
  if (!stats) throw IoError("cannot open '" + stats_path + "' for writing");
  stats << stats_csv_header();

  const auto result = train(
      formation_task_factory(cfg.world, cfg.reward, cfg.task), cfg.train,
      [&](const EpisodeStats& e) {
        stats << stats_csv_row(e);
        stats.flush();
        if ((e.episode + 1) % 100 == 0) {
          std::cerr << "episode " << e.episode + 1 << " return " << e.ret
                    << " in-radius " << e.time_in_radius << " epsilon "
                    << e.epsilon << "\n";
        }
      });
  WeightFile file{result.net, cfg.world.observation_range,
                  {model, seed, cfg.train.episodes}};
  save_weights(file, out);
  std::cerr << "wrote " << out << " (" << result.stats.gradient_steps
            << " gradient steps) and " << stats_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& config_path, const std::string& scenario_name,
             const std::string& reach_path, const std::string& keep_path,
             std::uint64_t seed, const std::string& out,
             const std::string& metrics_path) {
  const RunConfig cfg = config_from(config_path);
  const Scenario& scenario = cfg.scenario(scenario_name);
  const WeightFile reach = load_weights(reach_path);
  const WeightFile keep = load_weights(keep_path);
  const Trace trace =
      run_scenario(scenario, cfg.world, cfg.reward, cfg.policy, reach, keep,
                   seed);
  export_trace(trace, out);
  const EvalMetrics m = compute_metrics(trace, cfg.world.robot_radius);
  if (!metrics_path.empty()) export_metrics(m, metrics_path);
  for (const auto& f : m.followers) {
    std::cout << "follower " << f.id << ": mean error " << f.mean_error
              << " m, max " << f.max_error << " m, final " << f.final_error
              << " m, collisions " << f.collisions << "\n";
  }
  std::cout << "min separation " << m.min_separation << " m\n";
  return kExitOk;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir) {
  const RunConfig cfg = config_from(config_path);
  std::filesystem::create_directories(out_dir);
  const auto arms = compare_rewards(cfg.compare_config());
  export_comparison(arms, (std::filesystem::path(out_dir) / "compare.csv").string());
  int wins = 0;
  for (const auto& a : arms) {
    const int shaped = a.shaped.empty() ? 0 : a.shaped.back();
    const int state = a.state_only.empty() ? 0 : a.state_only.back();
    wins += shaped >= state ? 1 : 0;
    std::cout << "seed " << a.seed << ": final window state-action " << shaped
              << ", state-only " << state << "\n";
  }
  std::cout << "state-action arm ahead or tied in " << wins << "/"
            << arms.size() << " seeds\n";
  return kExitOk;
}

int cmd_gradcheck(int nets, int params, std::uint64_t seed) {
  const GradcheckReport r = run_gradcheck(nets, params, seed);
  std::cout << "max relative error " << r.worst << " over " << nets
            << " networks x " << params << " parameters (threshold "
            << r.threshold << ")\n";
  return r.passed() ? kExitOk : kExitPropertyFailed;
}

int cmd_oracle(std::uint64_t seed) {
  const OracleReport r = run_chain_oracle(seed);
  std::cout << "tabular Q-learning max error " << r.tabular_error
            << "\nDDQN max Q error " << r.ddqn_error << ", greedy policy "
            << (r.policy_matches ? "matches" : "differs") << "\n";
  return r.passed() ? kExitOk : kExitPropertyFailed;
}

int cmd_replay(const std::string& config_path, const std::string& trace_path,
               const std::string& metrics_path) {
  const RunConfig cfg = config_from(config_path);
  const Trace trace = import_trace(trace_path);
  const EvalMetrics m = compute_metrics(trace, cfg.world.robot_radius);
  if (!metrics_path.empty()) export_metrics(m, metrics_path);
  for (const auto& f : m.followers) {
    std::cout << "follower " << f.id << ": mean error " << f.mean_error
              << " m, max " << f.max_error << " m, collisions " << f.collisions
              << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader-follower formation control with double deep Q-networks"};
  app.require_subcommand(1);

  std::string config_path, model, out, scenario, reach, keep, metrics, stats,
      trace;
  std::uint64_t seed = 0;
  std::int64_t episodes = -1;
  int nets = 10, params = 100;

  auto* train_cmd = app.add_subcommand("train", "train a reach or keep model");
  train_cmd->add_option("--model", model, "reach | keep")
      ->required()
      ->check(CLI::IsMember({"reach", "keep"}));
  train_cmd->add_option("--config", config_path, "JSON run config")->required();
  train_cmd->add_option("--out", out, "output weight file")->required();
  train_cmd->add_option("--seed", seed, "RNG seed")->required();
  train_cmd->add_option("--episodes", episodes, "override episode count");
  train_cmd->add_option("--stats", stats, "stats CSV path");

  auto* eval_cmd = app.add_subcommand("eval", "run an evaluation scenario");
  eval_cmd->add_option("--scenario", scenario)->required();
  eval_cmd->add_option("--reach", reach, "reach weights")->required();
  eval_cmd->add_option("--keep", keep, "keep weights")->required();
  eval_cmd->add_option("--seed", seed)->required();
  eval_cmd->add_option("--out", out, "trace CSV")->required();
  eval_cmd->add_option("--config", config_path, "JSON run config");
  eval_cmd->add_option("--metrics", metrics, "metrics CSV");

  auto* compare_cmd =
      app.add_subcommand("compare-rewards", "state vs state-action reward");
  compare_cmd->add_option("--config", config_path)->required();
  compare_cmd->add_option("--out", out, "output directory")->required();

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check");
  grad_cmd->add_option("--nets", nets);
  grad_cmd->add_option("--params", params);
  grad_cmd->add_option("--seed", seed);

  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "chain-MDP DDQN vs value iteration");
  oracle_cmd->add_option("--seed", seed);

  auto* replay_cmd = app.add_subcommand("replay", "metrics of a saved trace");
  replay_cmd->add_option("--trace", trace)->required();
  replay_cmd->add_option("--config", config_path);
  replay_cmd->add_option("--metrics", metrics);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) {
      return cmd_train(config_path, model, out, seed, episodes, stats);
    }
    if (*eval_cmd) {
      return cmd_eval(config_path, scenario, reach, keep, seed, out, metrics);
    }
    if (*compare_cmd) return cmd_compare(config_path, out);
    if (*grad_cmd) return cmd_gradcheck(nets, params, seed);
    if (*oracle_cmd) return cmd_oracle(seed);
    if (*replay_cmd) return cmd_replay(config_path, trace, metrics);
  } catch (const formation::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
