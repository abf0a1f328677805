#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "formation/env.hpp"
#include "formation/net.hpp"

namespace formation {

struct Transition {
  Features state = Features::Zero();
  ActionIndex action;
  double reward = 0.0;
  Features next_state = Features::Zero();
  bool terminal = false;
};

/// Fixed-capacity FIFO of transitions; the oldest entry is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return data_.size(); }
  bool empty() const { return size_ == 0; }

  /// i = 0 is the oldest surviving transition.
  const Transition& at(std::size_t i) const;

  /// Uniform sampling with replacement. Throws NotReady when the buffer holds
  /// fewer than `batch_size` transitions.
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;
  std::vector<std::size_t> sample_indices(std::size_t batch_size,
                                          Rng& rng) const;

 private:
  std::vector<Transition> data_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
};

struct EpsilonSchedule {
  double start = 1.0;
  double decay = 0.9975;
  double floor = 0.05;

  void validate() const;
};

/// max(floor, start * decay^episode).
double epsilon_at(const EpsilonSchedule& schedule, std::int64_t episode);

/// Lowest index among the maximal entries.
ActionIndex greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q);

ActionIndex select_action(const Network<double>& net, const Features& features,
                          double epsilon, Rng& rng);

/// Double-DQN regression targets: the online network picks the next action,
/// the target network values it. Terminal transitions never touch next_state.
std::vector<double> ddqn_targets(std::span<const Transition> batch,
                                 const Network<double>& online,
                                 const Network<double>& target, double gamma);

enum class ModelKind { Reach, Keep };
const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct TrainConfig {
  int batch_size = 64;
  double gamma = 0.99;
  double learning_rate = 0.0003;
  int max_steps_per_episode = 300;
  std::size_t replay_capacity = 200000;
  std::size_t replay_min = 100000;
  int target_sync_period = 1000;  // gradient steps
  std::int64_t episodes = 0;
  EpsilonSchedule epsilon;
  LossKind loss = LossKind::Mse;
  ModelKind model_kind = ModelKind::Reach;
  double switch_radius = 0.1;  // m
  std::uint64_t rng_seed = 0;
  std::vector<int> arch = kDefaultArch;

  void validate() const;
};

struct StepOutcome {
  Features next_state = Features::Zero();
  double reward = 0.0;
  bool terminal = false;
  bool collision = false;
  // Distance to the formation target after the step; NaN when the
  // environment has no such notion.
  double distance_error = std::numeric_limits<double>::quiet_NaN();
};

/// Episodic environment driven by the training loop.
class TrainingEnv {
 public:
  virtual ~TrainingEnv() = default;
  virtual Features reset(Rng& rng) = 0;
  virtual StepOutcome step(ActionIndex action, Rng& rng) = 0;
  /// Radius used for the per-episode time-in-radius statistic.
  virtual double stats_radius() const { return 0.15; }
};

using EnvFactory = std::function<std::unique_ptr<TrainingEnv>()>;

struct EpisodeStats {
  std::int64_t episode = 0;
  double ret = 0.0;
  int steps = 0;
  int time_in_radius = 0;
  int collisions = 0;
  double epsilon = 0.0;
  std::vector<double> distance_errors;  // one per step
};

struct TrainStats {
  std::vector<EpisodeStats> episodes;
  std::int64_t env_steps = 0;
  std::int64_t gradient_steps = 0;
  std::int64_t target_syncs = 0;
};

struct TrainResult {
  Network<double> net;
  TrainStats stats;
};

using EpisodeCallback = std::function<void(const EpisodeStats&)>;

/// Double-DQN training loop: epsilon-greedy rollouts into a replay buffer, one
/// gradient step per environment step once warm, hard target sync.
TrainResult train(const EnvFactory& env_factory, const TrainConfig& config,
                  const EpisodeCallback& on_episode = {});

/// CSV header and row for one episode: episode,return,steps,time_in_radius,
/// collisions,epsilon.
std::string stats_csv_header();
std::string stats_csv_row(const EpisodeStats& e);
void write_stats_csv(const std::string& path, const TrainStats& stats);

// Tabular validation oracles.

using QTable = Eigen::MatrixXd;  // states x actions

/// One Q-learning backup: Q(s,a) += alpha * (r + gamma max Q(s',.) - Q(s,a)).
void tabular_q_update(QTable& q, int s, int a, double r, int s_next,
                      double alpha, double gamma);

struct MdpOutcome {
  int next_state = 0;
  double probability = 1.0;
  double reward = 0.0;
};

/// Finite MDP with explicit outcome lists per (state, action). Terminal
/// states have value zero and are never backed up.
struct FiniteMdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::vector<std::vector<MdpOutcome>>> outcomes;  // [s][a]
  std::vector<bool> terminal;

  void validate() const;
};

/// Bellman optimality backups until the largest change drops below
/// `tolerance`.
QTable value_iteration(const FiniteMdp& mdp, double gamma, double tolerance,
                       int max_iterations = 1000000);

/// s0 -> s1 -> goal. Action 0 moves right, every other action moves left
/// (staying put in s0). Reaching the goal pays 1, everything else 0.
FiniteMdp chain_mdp(int num_actions = 2);

/// The chain MDP as a training environment with one-hot state features.
class ChainEnv final : public TrainingEnv {
 public:
  ChainEnv();
  Features reset(Rng& rng) override;
  StepOutcome step(ActionIndex action, Rng& rng) override;

  static Features one_hot(int state);

 private:
  FiniteMdp mdp_;
  int state_ = 0;
};

}  // namespace formation
