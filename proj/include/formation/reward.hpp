#pragma once

#include <span>

#include "formation/geometry.hpp"

namespace formation {

/// Distance/bearing pair of one entity seen from the follower.
struct Polar {
  double distance = 0.0;  // m
  double bearing = 0.0;   // rad, (-pi, pi]
};

struct RewardConfig {
  int num_actions = 8;
  int num_negative_actions = 5;
  double obstacle_epsilon = 0.1;  // m

  void validate() const;
};

struct RewardBreakdown {
  double target = 0.0;        // r_t
  double obstacle_max = 0.0;  // max over obstacles of r_o, 0 when none
  double total = 0.0;
};

/// 2^d.
double distance_reward(double d);

/// 1 - delta/pi - n_neg/n, where delta is the wrapped difference between the
/// entity bearing and the action direction. Range [-5/8, 3/8] at defaults.
double alignment_reward(double entity_bearing, ActionIndex action,
                        const RewardConfig& cfg = {});

double target_reward(const Polar& to_target, ActionIndex action,
                     const RewardConfig& cfg = {});

/// 2^(1/(d + eps)) * alignment.
double obstacle_reward(const Polar& to_obstacle, ActionIndex action,
                       const RewardConfig& cfg = {});

/// Obstacle-aware reward used while approaching the target: r_t - max r_o.
/// The max ranges over every obstacle passed in; an empty list contributes 0.
RewardBreakdown reach_reward(std::span<const Polar> obstacles,
                             const Polar& to_target, ActionIndex action,
                             const RewardConfig& cfg = {});

/// Reward once in formation: r_t only.
double keep_reward(const Polar& to_target, ActionIndex action,
                   const RewardConfig& cfg = {});

/// State-only baseline, -d. Only used by the reward-design comparison.
double state_only_reward(const Polar& to_target);

}  // namespace formation
