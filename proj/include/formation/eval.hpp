#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "formation/env.hpp"
#include "formation/learner.hpp"
#include "formation/net.hpp"
#include "formation/policy.hpp"
#include "formation/task.hpp"

namespace formation {

struct FollowerSpec {
  Vec2 start = Vec2::Zero();
  Vec2 offset = Vec2::Zero();
};

/// A fully specified evaluation run: leader motion, follower starts and
/// formation offsets, extra static obstacles, episode length and seeds.
struct Scenario {
  std::string name;
  LeaderMode leader_mode = StaticMotion{};
  Vec2 leader_start = Vec2::Zero();
  std::vector<FollowerSpec> followers;
  std::vector<Vec2> obstacles;
  int steps = 1200;
  std::vector<std::uint64_t> seeds = {0};

  void validate(const WorldConfig& world) const;
};

struct TraceRecord {
  std::int64_t step = 0;
  double time = 0.0;
  int agent_id = 0;
  AgentRole role = AgentRole::Leader;
  double x = 0.0;
  double y = 0.0;
  int action = -1;       // action that led to this state, -1 if none
  double reward = 0.0;   // reward of that action
  std::string mode = "-";
  double dist_err = 0.0;  // followers only
};

struct Trace {
  std::vector<TraceRecord> records;  // step-major, agent order within a step
};

struct PolicyConfig {
  double switch_radius = 0.1;
  double release_radius = 0.25;
};

/// Runs the scenario with one DualPolicy per follower (agent ids: leader 0,
/// followers 1..n, obstacles after). Records the initial state and every step.
Trace run_scenario(const Scenario& scenario, const WorldConfig& world,
                   const RewardConfig& reward, const PolicyConfig& policy,
                   const WeightFile& reach, const WeightFile& keep,
                   std::uint64_t seed);

/// Per-step distance of the follower from its formation target.
std::vector<double> distance_error(const Trace& trace, int follower_id);

struct FollowerMetrics {
  int id = 0;
  double mean_error = 0.0;
  double max_error = 0.0;
  double final_error = 0.0;
  int collisions = 0;  // steps in contact with any other agent
};

struct EvalMetrics {
  std::vector<FollowerMetrics> followers;
  int collision_count = 0;
  double min_separation = 0.0;  // smallest pairwise distance involving a
                                // follower over the whole trace
};

/// Metrics over steps [from_step, end]; collisions are recounted from
/// positions with the env's contact rule.
EvalMetrics compute_metrics(const Trace& trace, double robot_radius,
                            std::int64_t from_step = 0);

/// Steps with distance error <= radius, summed over consecutive windows of
/// `window` episodes (the last window may be partial).
std::vector<int> time_in_radius(const TrainStats& stats, double radius,
                                int window = 10);

std::string trace_csv_header();
std::string trace_to_csv(const Trace& trace);
Trace trace_from_csv(const std::string& text);
void export_trace(const Trace& trace, const std::string& path);
Trace import_trace(const std::string& path);

void export_metrics(const EvalMetrics& metrics, const std::string& path);

struct CompareConfig {
  WorldConfig world;
  RewardConfig reward;
  TrainConfig train;  // model_kind forced to keep
  TaskConfig task;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int window = 10;
  double radius = 0.15;
  // Replace the state-only arm's reward with the shaped one (control run).
  bool control = false;
};

struct CompareArm {
  std::uint64_t seed = 0;
  std::vector<int> shaped;      // time_in_radius per window
  std::vector<int> state_only;
};

/// Trains keep models with the shaped state-action reward and with the
/// state-only distance reward, same seeds, and returns both learning curves.
std::vector<CompareArm> compare_rewards(const CompareConfig& config);

void export_comparison(const std::vector<CompareArm>& arms,
                       const std::string& path);

}  // namespace formation
