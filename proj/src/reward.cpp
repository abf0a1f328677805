#include "formation/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace formation {

void RewardConfig::validate() const {
  if (!(num_negative_actions > 0 && num_negative_actions < num_actions)) {
    throw ConfigError("reward: need 0 < num_negative_actions < num_actions");
  }
  if (!(obstacle_epsilon > 0.0)) {
    throw ConfigError("reward: obstacle_epsilon must be positive");
  }
}

double distance_reward(double d) {
  if (!(d >= 0.0)) throw InvalidArgument("distance_reward: negative distance");
  return std::exp2(d);
}

double alignment_reward(double entity_bearing, ActionIndex action,
                        const RewardConfig& cfg) {
  const double delta =
      angular_difference(entity_bearing, action_angle<double>(action));
  return 1.0 - delta / std::numbers::pi -
         static_cast<double>(cfg.num_negative_actions) / cfg.num_actions;
}

double target_reward(const Polar& to_target, ActionIndex action,
                     const RewardConfig& cfg) {
  return distance_reward(to_target.distance) *
         alignment_reward(to_target.bearing, action, cfg);
}

double obstacle_reward(const Polar& to_obstacle, ActionIndex action,
                       const RewardConfig& cfg) {
  if (!(to_obstacle.distance >= 0.0)) {
    throw InvalidArgument("obstacle_reward: negative distance");
  }
  const double factor =
      std::exp2(1.0 / (to_obstacle.distance + cfg.obstacle_epsilon));
  return factor * alignment_reward(to_obstacle.bearing, action, cfg);
}

RewardBreakdown reach_reward(std::span<const Polar> obstacles,
                             const Polar& to_target, ActionIndex action,
                             const RewardConfig& cfg) {
  RewardBreakdown out;
  out.target = target_reward(to_target, action, cfg);
  if (obstacles.empty()) {
    out.total = out.target;
    return out;
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (const Polar& o : obstacles) {
    worst = std::max(worst, obstacle_reward(o, action, cfg));
  }
  out.obstacle_max = worst;
  out.total = out.target - worst;
  return out;
}

double keep_reward(const Polar& to_target, ActionIndex action,
                   const RewardConfig& cfg) {
  return target_reward(to_target, action, cfg);
}

double state_only_reward(const Polar& to_target) {
  return -to_target.distance;
}

}  // namespace formation
