#include "formation/oracle.hpp"

#include <random>

namespace formation {

GradcheckReport run_gradcheck(int nets, int parameters, std::uint64_t seed) {
  GradcheckReport r;
  std::mt19937_64 rng(seed);
  GradientCheckOptions opt;
  opt.parameters = parameters;
  for (int i = 0; i < nets; ++i) {
    const auto net = init_network<double>(rng());
    r.worst = std::max(r.worst, gradient_check(net, rng, opt));
  }
  return r;
}

QTable tabular_chain_q(int num_actions, int updates, double epsilon,
                       double gamma, std::uint64_t seed) {
  const FiniteMdp mdp = chain_mdp(num_actions);
  QTable q = QTable::Zero(mdp.num_states, mdp.num_actions);
  Eigen::MatrixXi visits = Eigen::MatrixXi::Zero(mdp.num_states,
                                                 mdp.num_actions);
  Rng rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any(0, num_actions - 1);
  int s = 0;
  for (int n = 0; n < updates; ++n) {
    int a = 0;
    if (coin(rng) < epsilon) {
      a = any(rng);
    } else {
      q.row(s).maxCoeff(&a);
    }
    const auto& o = mdp.outcomes[static_cast<std::size_t>(s)]
                                [static_cast<std::size_t>(a)].front();
    const double alpha = 1.0 / ++visits(s, a);
    tabular_q_update(q, s, a, o.reward, o.next_state, alpha, gamma);
    s = mdp.terminal[static_cast<std::size_t>(o.next_state)] ? 0
                                                             : o.next_state;
  }
  return q;
}

TrainConfig chain_train_config(std::uint64_t seed) {
  TrainConfig c;
  c.episodes = 400;
  c.max_steps_per_episode = 20;
  c.replay_capacity = 5000;
  c.replay_min = 500;
  c.target_sync_period = 200;
  c.batch_size = 32;
  c.epsilon.decay = 0.99;
  c.epsilon.floor = 0.1;
  c.rng_seed = seed;
  return c;
}

OracleReport run_chain_oracle(std::uint64_t seed) {
  OracleReport r;
  const double gamma = 0.99;
  const QTable q2 = value_iteration(chain_mdp(2), gamma, 1e-12);
  const QTable tab = tabular_chain_q(2, 10000, 0.2, gamma, seed);
  r.tabular_error = (tab - q2).topRows(2).cwiseAbs().maxCoeff();

  r.q_star = value_iteration(chain_mdp(kNumActions), gamma, 1e-12);
  const TrainConfig cfg = chain_train_config(seed);
  const auto result =
      train([] { return std::make_unique<ChainEnv>(); }, cfg);
  r.q_ddqn = QTable::Zero(3, kNumActions);
  r.policy_matches = true;
  for (int s = 0; s < 2; ++s) {
    r.q_ddqn.row(s) = result.net.forward(ChainEnv::one_hot(s)).transpose();
    Eigen::Index best_star = 0;
    r.q_star.row(s).maxCoeff(&best_star);
    if (greedy_action(r.q_ddqn.row(s).transpose()).value() != best_star) {
      r.policy_matches = false;
    }
  }
  r.ddqn_error = (r.q_ddqn - r.q_star).topRows(2).cwiseAbs().maxCoeff();
  return r;
}

}  // namespace formation
