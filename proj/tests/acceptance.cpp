// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "formation/config.hpp"
#include "formation/eval.hpp"
#include "formation/oracle.hpp"
#include "formation/reward.hpp"

namespace fs = std::filesystem;
using namespace formation;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reward_exactness() {
  constexpr double pi = std::numbers::pi;
  const double tol = 1e-12;
  const ActionIndex east(0);
  // Bearing delta against the east action is the angular difference itself.
  auto align = [&](double delta) { return alignment_reward(delta, east); };
  std::vector<std::string> bad;
  auto check = [&](const char* what, double got, double want) {
    if (!(std::abs(got - want) <= tol)) {
      bad.push_back(std::string(what) + "=" + fmt("%.17g", got));
    }
  };
  check("align(0)", align(0.0), 0.375);
  check("align(pi)", align(pi), -0.625);
  check("align(3pi/8)", align(3.0 * pi / 8.0), 0.0);
  check("distance(0)", distance_reward(0.0), 1.0);
  // Heading straight at an obstacle isolates the distance factor.
  check("factor(0.9)",
        obstacle_reward({0.9, 0.0}, east) / align(0.0), 2.0);
  if (!(align(3.0 * pi / 8.0 - 1e-9) > 0.0 &&
        align(3.0 * pi / 8.0 + 1e-9) < 0.0)) {
    bad.push_back("sign change not at 3pi/8");
  }
  Outcome o;
  o.pass = bad.empty();
  for (const auto& b : bad) o.detail += b + " ";
  if (o.pass) o.detail = "every value within 1e-12";
  return o;
}

Outcome gradient_check_criterion() {
  const auto t0 = Clock::now();
  const GradcheckReport r = run_gradcheck(10, 100, 2024);
  const double secs = seconds_since(t0);
  return {r.passed() && secs < 10.0,
          "max relative error " + fmt("%.2e", r.worst) + " in " +
              fmt("%.2f", secs) + " s"};
}

Outcome chain_oracle() {
  const auto t0 = Clock::now();
  const OracleReport r = run_chain_oracle(0);
  const double secs = seconds_since(t0);
  return {r.passed() && secs < 120.0,
          "tabular error " + fmt("%.4f", r.tabular_error) + ", DDQN error " +
              fmt("%.4f", r.ddqn_error) + ", greedy policy " +
              (r.policy_matches ? "matches" : "differs") + ", " +
              fmt("%.1f", secs) + " s"};
}

Outcome epsilon_schedule() {
  const EpsilonSchedule s;
  bool ok = epsilon_at(s, 0) == 1.0 && epsilon_at(s, 1) == 0.9975;
  double prev = epsilon_at(s, 0);
  std::int64_t first_floor = -1;
  for (std::int64_t e = 1; e <= 20000; ++e) {
    const double v = epsilon_at(s, e);
    ok = ok && v <= prev && v >= 0.05;
    if (v == 0.05 && first_floor < 0) first_floor = e;
    if (first_floor >= 0) ok = ok && v == 0.05;
    prev = v;
  }
  ok = ok && first_floor > 0;
  return {ok, "floor reached at episode " + std::to_string(first_floor) +
                  " and held to 20000"};
}

WeightFile train_weights(const RunConfig& cfg, ModelKind kind,
                         std::uint64_t seed) {
  TrainConfig train = cfg.train;
  train.model_kind = kind;
  train.rng_seed = seed;
  TaskConfig task = cfg.task;
  task.model_kind = kind;
  const auto result =
      formation::train(formation_task_factory(cfg.world, cfg.reward, task),
                       train);
  return {result.net, cfg.world.observation_range,
          {model_kind_name(kind), seed, train.episodes}};
}

struct SeedModels {
  std::uint64_t seed = 0;
  WeightFile reach;
  WeightFile keep;
};

Outcome formation_keeping(const RunConfig& cfg,
                          const std::vector<SeedModels>& models) {
  const Scenario& circle = cfg.scenario("circle");
  const std::int64_t from = circle.steps - 800;
  int passed = 0;
  std::string detail;
  for (const auto& m : models) {
    const Trace t = run_scenario(circle, cfg.world, cfg.reward, cfg.policy,
                                 m.reach, m.keep, m.seed);
    const EvalMetrics em = compute_metrics(t, cfg.world.robot_radius, from);
    double mean = 0.0, worst = 0.0;
    for (const auto& f : em.followers) {
      mean = std::max(mean, f.mean_error);
      worst = std::max(worst, f.max_error);
    }
    const bool ok = mean < 0.3 && worst < 0.6;
    passed += ok ? 1 : 0;
    detail += "seed " + std::to_string(m.seed) + " mean " + fmt("%.3f", mean) +
              " max " + fmt("%.3f", worst) + (ok ? " ok; " : " fail; ");
  }
  return {passed >= 2, std::to_string(passed) + "/3 seeds: " + detail};
}

Outcome collision_free_reaching(const RunConfig& cfg,
                                const std::vector<SeedModels>& models) {
  const double radius = cfg.world.robot_radius;
  const double switch_radius = cfg.policy.switch_radius;
  int passed = 0;
  std::string detail;
  for (const auto& m : models) {
    bool seed_ok = true;
    std::string notes;
    for (const char* name : {"setup1", "setup2", "setup3", "setup4"}) {
      const Trace t = run_scenario(cfg.scenario(name), cfg.world, cfg.reward,
                                   cfg.policy, m.reach, m.keep, m.seed);
      const EvalMetrics em = compute_metrics(t, radius);
      bool ok = em.min_separation > 2.0 * radius;
      double worst_final = 0.0;
      for (const auto& f : em.followers) {
        worst_final = std::max(worst_final, f.final_error);
      }
      ok = ok && worst_final < switch_radius;
      if (!ok) {
        notes += std::string(" ") + name + "(final " +
                 fmt("%.3f", worst_final) + ", min sep " +
                 fmt("%.3f", em.min_separation) + ")";
      }
      seed_ok = seed_ok && ok;
    }
    passed += seed_ok ? 1 : 0;
    detail += "seed " + std::to_string(m.seed) +
              (seed_ok ? " ok; " : " fail:" + notes + "; ");
  }
  return {passed >= 2, std::to_string(passed) + "/3 seeds: " + detail};
}

Outcome determinism(const std::string& cli, const fs::path& config,
                    const fs::path& work) {
  const fs::path dir = work / "determinism";
  fs::create_directories(dir);
  auto run_once = [&](const std::string& tag) {
    const std::string w = (dir / ("keep_" + tag + ".json")).string();
    const std::string st = (dir / ("stats_" + tag + ".csv")).string();
    const std::string tr = (dir / ("trace_" + tag + ".csv")).string();
    const std::string train = "\"" + cli + "\" train --model keep --config \"" +
                              config.string() + "\" --out \"" + w +
                              "\" --seed 7 --episodes 40 --stats \"" + st +
                              "\" 2>/dev/null";
    const std::string eval = "\"" + cli + "\" eval --scenario circle --reach \"" +
                             w + "\" --keep \"" + w + "\" --seed 7 --out \"" +
                             tr + "\" --config \"" + config.string() +
                             "\" >/dev/null";
    return std::system(train.c_str()) == 0 && std::system(eval.c_str()) == 0;
  };
  if (!run_once("a") || !run_once("b")) return {false, "CLI run failed"};
  std::string detail;
  bool ok = true;
  struct Artifact {
    const char* stem;
    const char* ext;
    const char* label;
  };
  for (const Artifact& f : {Artifact{"keep_", ".json", "weights"},
                            Artifact{"stats_", ".csv", "stats"},
                            Artifact{"trace_", ".csv", "trace"}}) {
    const std::string a = read_bytes(dir / (std::string(f.stem) + "a" + f.ext));
    const std::string b = read_bytes(dir / (std::string(f.stem) + "b" + f.ext));
    const bool same = !a.empty() && a == b;
    ok = ok && same;
    detail += std::string(f.label) + (same ? " identical; " : " differ; ");
  }
  return {ok, "two CLI runs, seed 7: " + detail};
}

Outcome reward_comparison(const RunConfig& cfg) {
  const auto arms = compare_rewards(cfg.compare_config());
  int wins = 0;
  std::string detail;
  for (const auto& a : arms) {
    const int shaped = a.shaped.empty() ? 0 : a.shaped.back();
    const int state = a.state_only.empty() ? 0 : a.state_only.back();
    wins += shaped >= state ? 1 : 0;
    detail += "seed " + std::to_string(a.seed) + " " + std::to_string(shaped) +
              " vs " + std::to_string(state) + "; ";
  }
  return {wins >= 2, std::to_string(wins) + "/" + std::to_string(arms.size()) +
                         " seeds (state-action vs state-only): " + detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli, config_path, work = (fs::temp_directory_path() /
                                        "formation_acceptance")
                                           .string();
  std::vector<int> only;
  app.add_option("--cli", cli, "formation_cli executable")->required();
  app.add_option("--config", config_path, "desk-scale config")->required();
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "run a subset of criteria");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(work);
  const RunConfig cfg = load_config(config_path);
  auto wanted = [&](int n) {
    return only.empty() || std::find(only.begin(), only.end(), n) != only.end();
  };

  std::vector<SeedModels> models;
  auto trained = [&]() -> const std::vector<SeedModels>& {
    if (models.empty()) {
      for (std::uint64_t seed : {1, 2, 3}) {
        const auto t0 = Clock::now();
        SeedModels m;
        m.seed = seed;
        m.keep = train_weights(cfg, ModelKind::Keep, seed);
        m.reach = train_weights(cfg, ModelKind::Reach, seed);
        save_weights(m.keep, (fs::path(work) / ("keep" + std::to_string(seed) +
                                                ".json")).string());
        save_weights(m.reach, (fs::path(work) / ("reach" +
                                                 std::to_string(seed) +
                                                 ".json")).string());
        std::cerr << "trained seed " << seed << " in "
                  << fmt("%.0f", seconds_since(t0)) << " s\n";
        models.push_back(std::move(m));
      }
    }
    return models;
  };

  const std::vector<std::pair<const char*, std::function<Outcome()>>>
      criteria = {
          {"reward exactness", reward_exactness},
          {"gradient check", gradient_check_criterion},
          {"chain MDP oracle", chain_oracle},
          {"formation keeping (circle)",
           [&] { return formation_keeping(cfg, trained()); }},
          {"collision-free reaching (setups 1-4)",
           [&] { return collision_free_reaching(cfg, trained()); }},
          {"determinism",
           [&] { return determinism(cli, config_path, work); }},
          {"reward design comparison", [&] { return reward_comparison(cfg); }},
          {"epsilon schedule", epsilon_schedule},
      };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!wanted(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " ("
              << criteria[i].first << "): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
