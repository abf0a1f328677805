#include "formation/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace formation {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : data_(capacity) {
  if (capacity == 0) throw InvalidArgument("replay buffer capacity is zero");
}

void ReplayBuffer::push(const Transition& t) {
  data_[head_] = t;
  head_ = (head_ + 1) % data_.size();
  size_ = std::min(size_ + 1, data_.size());
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw InvalidArgument("replay index out of range");
  const std::size_t oldest = (head_ + data_.size() - size_) % data_.size();
  return data_[(oldest + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size,
                                                      Rng& rng) const {
  if (size_ < batch_size || size_ == 0) {
    throw NotReady("replay buffer holds " + std::to_string(size_) +
                   " transitions, need " + std::to_string(batch_size));
  }
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size,
                                             Rng& rng) const {
  std::vector<Transition> out;
  out.reserve(batch_size);
  for (std::size_t i : sample_indices(batch_size, rng)) out.push_back(at(i));
  return out;
}

void EpsilonSchedule::validate() const {
  if (!(floor >= 0.0 && floor <= start && start <= 1.0)) {
    throw ConfigError("epsilon: need 0 <= floor <= start <= 1");
  }
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw ConfigError("epsilon: decay must be in (0, 1]");
  }
}

double epsilon_at(const EpsilonSchedule& schedule, std::int64_t episode) {
  if (episode < 0) throw InvalidArgument("epsilon_at: negative episode");
  const double e =
      schedule.start * std::pow(schedule.decay, static_cast<double>(episode));
  return std::max(schedule.floor, e);
}

ActionIndex greedy_action(const Eigen::Ref<const Eigen::VectorXd>& q) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q.size(); ++i) {
    if (q(i) > q(best)) best = i;
  }
  return ActionIndex(static_cast<int>(best));
}

ActionIndex select_action(const Network<double>& net, const Features& features,
                          double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw InvalidArgument("select_action: epsilon outside [0, 1]");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (epsilon > 0.0 && coin(rng) < epsilon) {
    std::uniform_int_distribution<int> any(0, net.output_size() - 1);
    return ActionIndex(any(rng));
  }
  return greedy_action(net.forward(features));
}

namespace {

// Targets for a batch given as column matrices; `terminal` rows of next are
// never evaluated.
std::vector<double> ddqn_targets_impl(const Eigen::MatrixXd& next,
                                      std::span<const double> rewards,
                                      std::span<const char> terminal,
                                      const Network<double>& online,
                                      const Network<double>& target,
                                      double gamma) {
  const std::size_t n = rewards.size();
  std::vector<double> y(rewards.begin(), rewards.end());
  std::vector<Eigen::Index> live;
  for (std::size_t k = 0; k < n; ++k) {
    if (!terminal[k]) live.push_back(static_cast<Eigen::Index>(k));
  }
  if (live.empty()) return y;
  Eigen::MatrixXd s(next.rows(), static_cast<Eigen::Index>(live.size()));
  for (std::size_t c = 0; c < live.size(); ++c) {
    s.col(static_cast<Eigen::Index>(c)) = next.col(live[c]);
  }
  const Eigen::MatrixXd q_online = online.forward_batch(s);
  const Eigen::MatrixXd q_target = target.forward_batch(s);
  for (std::size_t c = 0; c < live.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    const int a = greedy_action(q_online.col(col)).value();
    y[static_cast<std::size_t>(live[c])] += gamma * q_target(a, col);
  }
  return y;
}

}  // namespace

std::vector<double> ddqn_targets(std::span<const Transition> batch,
                                 const Network<double>& online,
                                 const Network<double>& target, double gamma) {
  if (online.arch() != target.arch()) {
    throw ShapeError("ddqn_targets: online and target architectures differ");
  }
  Eigen::MatrixXd next(online.input_size(),
                       static_cast<Eigen::Index>(batch.size()));
  std::vector<double> rewards;
  std::vector<char> terminal;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    next.col(static_cast<Eigen::Index>(k)) = batch[k].next_state;
    rewards.push_back(batch[k].reward);
    terminal.push_back(batch[k].terminal ? 1 : 0);
  }
  return ddqn_targets_impl(next, rewards, terminal, online, target, gamma);
}

const char* model_kind_name(ModelKind kind) {
  return kind == ModelKind::Reach ? "reach" : "keep";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "reach") return ModelKind::Reach;
  if (name == "keep") return ModelKind::Keep;
  throw ConfigError("unknown model kind '" + name + "'");
}

void TrainConfig::validate() const {
  if (batch_size <= 0) throw ConfigError("train: batch_size must be positive");
  if (static_cast<std::size_t>(batch_size) > replay_min) {
    throw ConfigError("train: batch_size exceeds replay_min");
  }
  if (replay_min > replay_capacity) {
    throw ConfigError("train: replay_min exceeds replay_capacity");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("train: gamma in (0,1)");
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate <= 0");
  if (max_steps_per_episode <= 0) {
    throw ConfigError("train: max_steps_per_episode must be positive");
  }
  if (target_sync_period <= 0) {
    throw ConfigError("train: target_sync_period must be positive");
  }
  if (episodes < 0) throw ConfigError("train: negative episode count");
  if (arch.size() < 2 || arch.front() != Features::RowsAtCompileTime ||
      arch.back() != kNumActions) {
    throw ConfigError("train: network must map 8 features to 8 actions");
  }
  epsilon.validate();
}

TrainResult train(const EnvFactory& env_factory, const TrainConfig& config,
                  const EpisodeCallback& on_episode) {
  config.validate();
  // Network initialization draws from its own stream so that changing the
  // rollout code never perturbs the initial weights.
  TrainResult result{init_network<double>(config.rng_seed ^ 0x5DEECE66DULL,
                                          config.arch),
                     {}};
  if (config.episodes == 0) return result;

  Network<double>& online = result.net;
  Network<double> target = online;
  AdamState<double> adam(online);
  ReplayBuffer replay(config.replay_capacity);
  Rng rng(config.rng_seed);
  auto env = env_factory();

  const auto batch = static_cast<std::size_t>(config.batch_size);
  const Eigen::Index in = online.input_size();
  Eigen::MatrixXd states(in, config.batch_size);
  Eigen::MatrixXd next(in, config.batch_size);
  std::vector<int> actions(batch);
  std::vector<double> rewards(batch);
  std::vector<char> terminal(batch);

  for (std::int64_t ep = 0; ep < config.episodes; ++ep) {
    EpisodeStats es;
    es.episode = ep;
    es.epsilon = epsilon_at(config.epsilon, ep);
    Features s = env->reset(rng);
    for (int t = 0; t < config.max_steps_per_episode; ++t) {
      const ActionIndex a = select_action(online, s, es.epsilon, rng);
      const StepOutcome out = env->step(a, rng);
      replay.push({s, a, out.reward, out.next_state, out.terminal});
      ++result.stats.env_steps;
      es.ret += out.reward;
      ++es.steps;
      es.collisions += out.collision ? 1 : 0;
      if (!std::isnan(out.distance_error)) {
        es.distance_errors.push_back(out.distance_error);
        if (out.distance_error <= env->stats_radius()) ++es.time_in_radius;
      }

      if (replay.size() >= config.replay_min) {
        const auto idx = replay.sample_indices(batch, rng);
        for (std::size_t k = 0; k < batch; ++k) {
          const Transition& tr = replay.at(idx[k]);
          const auto col = static_cast<Eigen::Index>(k);
          states.col(col) = tr.state;
          next.col(col) = tr.next_state;
          actions[k] = tr.action.value();
          rewards[k] = tr.reward;
          terminal[k] = tr.terminal ? 1 : 0;
        }
        const auto y = ddqn_targets_impl(next, rewards, terminal, online,
                                         target, config.gamma);
        const auto lg = loss_and_gradients<double>(
            online, states, actions, std::span<const double>(y), config.loss);
        adam_step(online, adam, lg.grads, config.learning_rate);
        ++result.stats.gradient_steps;
        if (result.stats.gradient_steps % config.target_sync_period == 0) {
          target = online;
          ++result.stats.target_syncs;
        }
      }

      s = out.next_state;
      if (out.terminal) break;
    }
    if (on_episode) on_episode(es);
    result.stats.episodes.push_back(std::move(es));
  }
  return result;
}

std::string stats_csv_header() {
  return "episode,return,steps,time_in_radius,collisions,epsilon\n";
}

std::string stats_csv_row(const EpisodeStats& e) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%lld,%.17g,%d,%d,%d,%.17g\n",
                static_cast<long long>(e.episode), e.ret, e.steps,
                e.time_in_radius, e.collisions, e.epsilon);
  return buf;
}

void write_stats_csv(const std::string& path, const TrainStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << stats_csv_header();
  for (const auto& e : stats.episodes) out << stats_csv_row(e);
  if (!out) throw IoError("write failed for '" + path + "'");
}

void tabular_q_update(QTable& q, int s, int a, double r, int s_next,
                      double alpha, double gamma) {
  if (s < 0 || s >= q.rows() || s_next < 0 || s_next >= q.rows() || a < 0 ||
      a >= q.cols()) {
    throw InvalidArgument("tabular_q_update: index out of range");
  }
  const double td = r + gamma * q.row(s_next).maxCoeff() - q(s, a);
  q(s, a) += alpha * td;
}

void FiniteMdp::validate() const {
  if (num_states <= 0 || num_actions <= 0) {
    throw InvalidArgument("mdp: empty state or action set");
  }
  if (outcomes.size() != static_cast<std::size_t>(num_states) ||
      terminal.size() != static_cast<std::size_t>(num_states)) {
    throw InvalidArgument("mdp: tables do not match num_states");
  }
  for (int s = 0; s < num_states; ++s) {
    if (terminal[static_cast<std::size_t>(s)]) continue;
    const auto& row = outcomes[static_cast<std::size_t>(s)];
    if (row.size() != static_cast<std::size_t>(num_actions)) {
      throw InvalidArgument("mdp: missing actions for a state");
    }
    for (const auto& outs : row) {
      double p = 0.0;
      for (const auto& o : outs) {
        if (o.next_state < 0 || o.next_state >= num_states) {
          throw InvalidArgument("mdp: successor out of range");
        }
        p += o.probability;
      }
      if (std::abs(p - 1.0) > 1e-9) {
        throw InvalidArgument("mdp: outcome probabilities do not sum to 1");
      }
    }
  }
}

namespace {

// True when every non-terminal state reaches a terminal one with probability
// one under every policy, i.e. no closed set of non-terminal states exists.
bool always_terminates(const FiniteMdp& mdp) {
  const auto n = static_cast<std::size_t>(mdp.num_states);
  // Greatest fixed point of "some action keeps every outcome non-terminal".
  std::vector<bool> bad(n);
  for (std::size_t s = 0; s < n; ++s) bad[s] = !mdp.terminal[s];
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (!bad[s]) continue;
      // s can avoid termination only if some action has every outcome in bad.
      bool can_stay = false;
      for (const auto& outs : mdp.outcomes[s]) {
        bool all_bad = true;
        for (const auto& o : outs) {
          if (o.probability > 0.0 &&
              !bad[static_cast<std::size_t>(o.next_state)]) {
            all_bad = false;
          }
        }
        if (all_bad) can_stay = true;
      }
      if (!can_stay) {
        bad[s] = false;
        changed = true;
      }
    }
  }
  return std::none_of(bad.begin(), bad.end(), [](bool b) { return b; });
}

}  // namespace

QTable value_iteration(const FiniteMdp& mdp, double gamma, double tolerance,
                       int max_iterations) {
  mdp.validate();
  if (!(gamma >= 0.0)) throw InvalidArgument("value_iteration: gamma < 0");
  if (!(tolerance > 0.0)) throw InvalidArgument("value_iteration: tolerance");
  if (gamma >= 1.0 && !always_terminates(mdp)) {
    throw InvalidArgument(
        "value_iteration: gamma >= 1 on an MDP that need not terminate");
  }
  QTable q = QTable::Zero(mdp.num_states, mdp.num_actions);
  for (int it = 0; it < max_iterations; ++it) {
    QTable next = QTable::Zero(mdp.num_states, mdp.num_actions);
    for (int s = 0; s < mdp.num_states; ++s) {
      if (mdp.terminal[static_cast<std::size_t>(s)]) continue;
      for (int a = 0; a < mdp.num_actions; ++a) {
        double v = 0.0;
        for (const auto& o : mdp.outcomes[static_cast<std::size_t>(s)]
                                         [static_cast<std::size_t>(a)]) {
          v += o.probability *
               (o.reward + gamma * q.row(o.next_state).maxCoeff());
        }
        next(s, a) = v;
      }
    }
    const double change = (next - q).cwiseAbs().maxCoeff();
    q = std::move(next);
    if (change < tolerance) return q;
  }
  throw InvalidArgument("value_iteration: no convergence within iteration cap");
}

FiniteMdp chain_mdp(int num_actions) {
  if (num_actions < 2) throw InvalidArgument("chain_mdp: need >= 2 actions");
  FiniteMdp mdp;
  mdp.num_states = 3;
  mdp.num_actions = num_actions;
  mdp.terminal = {false, false, true};
  mdp.outcomes.resize(3);
  const auto n = static_cast<std::size_t>(num_actions);
  mdp.outcomes[0].resize(n);
  mdp.outcomes[1].resize(n);
  mdp.outcomes[0][0] = {{1, 1.0, 0.0}};
  mdp.outcomes[1][0] = {{2, 1.0, 1.0}};
  for (std::size_t a = 1; a < n; ++a) {
    mdp.outcomes[0][a] = {{0, 1.0, 0.0}};
    mdp.outcomes[1][a] = {{0, 1.0, 0.0}};
  }
  return mdp;
}

ChainEnv::ChainEnv() : mdp_(chain_mdp(kNumActions)) {}

Features ChainEnv::one_hot(int state) {
  Features f = Features::Zero();
  f(state) = 1.0;
  return f;
}

Features ChainEnv::reset(Rng&) {
  state_ = 0;
  return one_hot(state_);
}

StepOutcome ChainEnv::step(ActionIndex action, Rng&) {
  const auto& o = mdp_.outcomes[static_cast<std::size_t>(state_)]
                               [static_cast<std::size_t>(action.value())]
                                   .front();
  state_ = o.next_state;
  StepOutcome out;
  out.next_state = one_hot(state_);
  out.reward = o.reward;
  out.terminal = mdp_.terminal[static_cast<std::size_t>(state_)];
  return out;
}

}  // namespace formation
