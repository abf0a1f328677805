#include "formation/policy.hpp"

#include "formation/learner.hpp"

namespace formation {

const char* mode_name(PolicyMode mode) {
  return mode == PolicyMode::Reaching ? "reaching" : "keeping";
}

PolicyMode parse_mode(const std::string& name) {
  if (name == "reaching") return PolicyMode::Reaching;
  if (name == "keeping") return PolicyMode::Keeping;
  throw InvalidArgument("unknown policy mode '" + name + "'");
}

void DualPolicy::validate() const {
  if (!reach_net || !keep_net) throw ConfigError("policy: missing network");
  if (!(switch_radius >= 0.0 && release_radius >= switch_radius)) {
    throw ConfigError("policy: need 0 <= switch_radius <= release_radius");
  }
}

PolicyMode next_mode(PolicyMode mode, double target_distance,
                     double switch_radius, double release_radius) {
  if (mode == PolicyMode::Reaching && target_distance <= switch_radius) {
    return PolicyMode::Keeping;
  }
  if (mode == PolicyMode::Keeping && target_distance > release_radius) {
    return PolicyMode::Reaching;
  }
  return mode;
}

std::pair<ActionIndex, DualPolicy> policy_action(const DualPolicy& policy,
                                                 const Observation& obs,
                                                 double d_max) {
  DualPolicy next = policy;
  next.mode = next_mode(policy.mode, obs.to_target.distance,
                        policy.switch_radius, policy.release_radius);
  const Network<double>& net =
      next.mode == PolicyMode::Keeping ? *next.keep_net : *next.reach_net;
  const Features f = normalize_observation(obs, d_max);
  return {greedy_action(net.forward(f)), std::move(next)};
}

Vec2 follower_velocity(ActionIndex action, double follower_speed) {
  return follower_speed * action_direction<double>(action);
}

}  // namespace formation
