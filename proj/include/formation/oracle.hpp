#pragma once

#include <cstdint>

#include "formation/learner.hpp"

namespace formation {

struct GradcheckReport {
  double worst = 0.0;
  double threshold = 1e-4;
  bool passed() const { return worst < threshold; }
};

/// gradient_check over `nets` freshly initialized default-shape networks.
GradcheckReport run_gradcheck(int nets = 10, int parameters = 100,
                              std::uint64_t seed = 0);

/// Tabular Q-learning with 1/n step sizes on the chain MDP.
QTable tabular_chain_q(int num_actions, int updates, double epsilon,
                       double gamma, std::uint64_t seed);

/// Training settings for the chain-MDP run of the full DDQN stack.
TrainConfig chain_train_config(std::uint64_t seed);

struct OracleReport {
  double tabular_error = 0.0;  // max |Q - Q*|, tabular learner
  double ddqn_error = 0.0;     // max |Q - Q*| over non-terminal states
  bool policy_matches = false;
  QTable q_star;
  QTable q_ddqn;

  bool passed() const {
    return tabular_error < 0.01 && ddqn_error < 0.05 && policy_matches;
  }
};

OracleReport run_chain_oracle(std::uint64_t seed = 0);

}  // namespace formation
