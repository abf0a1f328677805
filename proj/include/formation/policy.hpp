#pragma once

#include <memory>
#include <utility>

#include "formation/env.hpp"
#include "formation/net.hpp"

namespace formation {

enum class PolicyMode { Reaching, Keeping };

const char* mode_name(PolicyMode mode);
PolicyMode parse_mode(const std::string& name);

/// Per-follower controller that drives with the reach network until the
/// target is within switch_radius, then with the keep network. It falls back
/// to reaching only once the target drifts beyond release_radius.
struct DualPolicy {
  std::shared_ptr<const Network<double>> reach_net;
  std::shared_ptr<const Network<double>> keep_net;
  double switch_radius = 0.1;   // m
  double release_radius = 0.25; // m
  PolicyMode mode = PolicyMode::Reaching;

  void validate() const;
};

/// Mode after observing the current target distance.
PolicyMode next_mode(PolicyMode mode, double target_distance,
                     double switch_radius, double release_radius);

std::pair<ActionIndex, DualPolicy> policy_action(const DualPolicy& policy,
                                                 const Observation& obs,
                                                 double d_max);

Vec2 follower_velocity(ActionIndex action, double follower_speed);

}  // namespace formation
