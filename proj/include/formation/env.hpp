#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "formation/geometry.hpp"
#include "formation/reward.hpp"

namespace formation {

using Rng = std::mt19937_64;

enum class AgentRole { Leader, Follower, Obstacle };

const char* role_name(AgentRole role);
AgentRole parse_role(const std::string& name);

struct AgentState {
  int id = 0;
  AgentRole role = AgentRole::Obstacle;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

struct WorldState {
  std::vector<AgentState> agents;
  double time = 0.0;
  std::int64_t step_count = 0;

  const AgentState& agent(int id) const;
  const AgentState& leader() const;
  bool has_agent(int id) const;
};

/// Builds a world at t = 0, checking id uniqueness and the single-leader rule.
WorldState make_world(std::vector<AgentState> agents);

struct CircleMotion {
  Vec2 center = Vec2::Zero();
  double radius = 0.8;
};
struct SquareMotion {
  Vec2 center = Vec2::Zero();
  double side = 1.2;
};
struct RandomWalkMotion {
  double redirect_period = 2.0;  // s
};
struct StaticMotion {};

using LeaderMode =
    std::variant<CircleMotion, SquareMotion, RandomWalkMotion, StaticMotion>;

struct WorldConfig {
  double dt = 0.1;                 // s
  double arena_half_extent = 2.5;  // m
  double robot_radius = 0.037;     // m
  double leader_speed = 0.3;       // m/s
  double follower_speed = 0.36;    // m/s
  LeaderMode leader_mode = StaticMotion{};
  std::uint64_t rng_seed = 0;

  int circle_waypoints = 64;
  double waypoint_tolerance = 0.05;  // m
  double heading_gain = 1.0;
  double far_distance = 100.0;      // virtual obstacle padding, m
  double observation_range = 3.0;   // distance normalization d_max, m

  void validate() const;
};

/// Advances every agent by one explicit Euler step of x' = a and clamps the
/// result to the arena. Leaders and followers must be commanded; obstacles
/// without a command stay put.
WorldState step_world(const WorldState& world,
                      const std::map<int, Vec2>& commands,
                      const WorldConfig& config);

/// Constant-speed waypoint tracker standing in for the leader's trajectory
/// controller. Holds the current waypoint, heading and random-walk schedule.
class LeaderController {
 public:
  LeaderController(LeaderMode mode, const WorldConfig& config);

  Vec2 command(const AgentState& leader, double time, Rng& rng);

  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  int current_waypoint() const { return current_; }

 private:
  LeaderMode mode_;
  double speed_;
  double tolerance_;
  double gain_;
  std::vector<Vec2> waypoints_;
  int current_ = -1;
  double heading_ = 0.0;
  bool heading_valid_ = false;
  double next_redirect_ = 0.0;
};

/// Closed circuit visited by the Circle/Square modes (empty for the others).
std::vector<Vec2> leader_waypoints(const LeaderMode& mode,
                                   const WorldConfig& config);

inline Vec2 target_position(const Vec2& leader_position, const Vec2& offset) {
  return leader_position + offset;
}

/// Vectors from the agent to its k nearest neighbours (any role), ascending by
/// distance with ties broken by lower id. Missing slots are virtual obstacles
/// at far_distance along bearing 0.
std::vector<Vec2> nearest_obstacles(const WorldState& world, int agent_id,
                                    int k = 2, double far_distance = 100.0);

struct Observation {
  Polar to_leader;
  Polar to_target;
  Polar to_obstacle1;
  Polar to_obstacle2;
};

/// Polar coordinates of `v`; the zero vector maps to (0, 0).
Polar to_polar(const Vec2& v);

Observation build_observation(const WorldState& world, int agent_id,
                              const Vec2& target_offset,
                              double far_distance = 100.0);

/// Every other agent as seen from `agent_id`, the obstacle set of the reach
/// reward.
std::vector<Polar> all_obstacles(const WorldState& world, int agent_id);

using Features = Eigen::Matrix<double, 8, 1>;

/// [d_l, th_l, d_t, th_t, d_o1, th_o1, d_o2, th_o2], distances clipped to
/// d_max then scaled to [0, 1], bearings divided by pi.
Features normalize_observation(const Observation& obs, double d_max);

bool detect_collision(const WorldState& world, int agent_id,
                      double robot_radius);

}  // namespace formation
