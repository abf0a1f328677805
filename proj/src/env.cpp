#include "formation/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace formation {

namespace {

constexpr double kSpeedTolerance = 1e-9;

double clamp_axis(double v, double h) { return std::clamp(v, -h, h); }

bool fits(const Vec2& p, double h) {
  return std::abs(p.x()) <= h && std::abs(p.y()) <= h;
}

}  // namespace

const char* role_name(AgentRole role) {
  switch (role) {
    case AgentRole::Leader:
      return "leader";
    case AgentRole::Follower:
      return "follower";
    case AgentRole::Obstacle:
      return "obstacle";
  }
  return "?";
}

AgentRole parse_role(const std::string& name) {
  if (name == "leader") return AgentRole::Leader;
  if (name == "follower") return AgentRole::Follower;
  if (name == "obstacle") return AgentRole::Obstacle;
  throw InvalidArgument("unknown agent role '" + name + "'");
}

const AgentState& WorldState::agent(int id) const {
  for (const auto& a : agents) {
    if (a.id == id) return a;
  }
  throw InvalidArgument("no agent with id " + std::to_string(id));
}

const AgentState& WorldState::leader() const {
  for (const auto& a : agents) {
    if (a.role == AgentRole::Leader) return a;
  }
  throw ConfigError("world has no leader");
}

bool WorldState::has_agent(int id) const {
  return std::any_of(agents.begin(), agents.end(),
                     [id](const AgentState& a) { return a.id == id; });
}

WorldState make_world(std::vector<AgentState> agents) {
  std::set<int> ids;
  int leaders = 0;
  for (const auto& a : agents) {
    if (!ids.insert(a.id).second) {
      throw ConfigError("duplicate agent id " + std::to_string(a.id));
    }
    if (!a.position.allFinite() || !a.velocity.allFinite()) {
      throw ConfigError("non-finite agent state");
    }
    if (a.role == AgentRole::Leader) ++leaders;
  }
  if (leaders != 1) throw ConfigError("world needs exactly one leader");
  WorldState w;
  w.agents = std::move(agents);
  return w;
}

void WorldConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("world: dt must be positive");
  if (!(arena_half_extent > 0.0)) throw ConfigError("world: arena too small");
  if (!(robot_radius > 0.0)) throw ConfigError("world: robot_radius <= 0");
  if (!(leader_speed >= 0.0)) throw ConfigError("world: leader_speed < 0");
  if (!(follower_speed > leader_speed)) {
    throw ConfigError("world: follower_speed must exceed leader_speed");
  }
  if (circle_waypoints < 3) throw ConfigError("world: circle_waypoints < 3");
  if (!(waypoint_tolerance > 0.0)) {
    throw ConfigError("world: waypoint_tolerance must be positive");
  }
  if (!(observation_range > 0.0)) {
    throw ConfigError("world: observation_range must be positive");
  }
  if (!(far_distance > 0.0)) throw ConfigError("world: far_distance <= 0");
  const double h = arena_half_extent;
  std::visit(
      [h](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CircleMotion>) {
          if (!(m.radius > 0.0) ||
              !fits(m.center + Vec2(m.radius, m.radius), h) ||
              !fits(m.center - Vec2(m.radius, m.radius), h)) {
            throw ConfigError("world: circle does not fit in arena");
          }
        } else if constexpr (std::is_same_v<M, SquareMotion>) {
          const double s = m.side / 2;
          if (!(m.side > 0.0) || !fits(m.center + Vec2(s, s), h) ||
              !fits(m.center - Vec2(s, s), h)) {
            throw ConfigError("world: square does not fit in arena");
          }
        } else if constexpr (std::is_same_v<M, RandomWalkMotion>) {
          if (!(m.redirect_period > 0.0)) {
            throw ConfigError("world: redirect_period must be positive");
          }
        }
      },
      leader_mode);
}

WorldState step_world(const WorldState& world,
                      const std::map<int, Vec2>& commands,
                      const WorldConfig& config) {
  WorldState next = world;
  const double h = config.arena_half_extent;
  for (auto& a : next.agents) {
    const auto it = commands.find(a.id);
    if (it == commands.end()) {
      if (a.role != AgentRole::Obstacle) {
        throw ConfigError("missing command for agent " + std::to_string(a.id));
      }
      a.velocity = Vec2::Zero();
      continue;
    }
    const Vec2& v = it->second;
    if (!v.allFinite()) throw InvalidArgument("non-finite command");
    if (a.role != AgentRole::Obstacle) {
      const double speed = a.role == AgentRole::Leader ? config.leader_speed
                                                       : config.follower_speed;
      const double n = v.norm();
      if (n != 0.0 && std::abs(n - speed) > kSpeedTolerance * (1.0 + speed)) {
        throw InvalidArgument("command speed " + std::to_string(n) +
                              " for agent " + std::to_string(a.id) +
                              " differs from configured " +
                              std::to_string(speed));
      }
    }
    a.velocity = v;
    const Vec2 p = a.position + v * config.dt;
    a.position = Vec2(clamp_axis(p.x(), h), clamp_axis(p.y(), h));
  }
  next.step_count = world.step_count + 1;
  next.time = static_cast<double>(next.step_count) * config.dt;
  return next;
}

std::vector<Vec2> leader_waypoints(const LeaderMode& mode,
                                   const WorldConfig& config) {
  std::vector<Vec2> out;
  if (const auto* c = std::get_if<CircleMotion>(&mode)) {
    const int n = config.circle_waypoints;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / n;
      out.push_back(c->center + c->radius * Vec2(std::cos(phi), std::sin(phi)));
    }
  } else if (const auto* s = std::get_if<SquareMotion>(&mode)) {
    const double h = s->side / 2;
    // Counter-clockwise, matching the circle's direction of travel.
    out = {s->center + Vec2(h, -h), s->center + Vec2(h, h),
           s->center + Vec2(-h, h), s->center + Vec2(-h, -h)};
  }
  return out;
}

LeaderController::LeaderController(LeaderMode mode, const WorldConfig& config)
    : mode_(mode),
      speed_(config.leader_speed),
      tolerance_(config.waypoint_tolerance),
      gain_(config.heading_gain),
      waypoints_(leader_waypoints(mode, config)) {}

Vec2 LeaderController::command(const AgentState& leader, double time,
                               Rng& rng) {
  if (std::holds_alternative<StaticMotion>(mode_) || speed_ == 0.0) {
    return Vec2::Zero();
  }
  if (const auto* rw = std::get_if<RandomWalkMotion>(&mode_)) {
    if (!heading_valid_ || time + 1e-9 >= next_redirect_) {
      std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                                   std::numbers::pi);
      heading_ = angle(rng);
      heading_valid_ = true;
      next_redirect_ = time + rw->redirect_period;
    }
    return speed_ * Vec2(std::cos(heading_), std::sin(heading_));
  }

  const int n = static_cast<int>(waypoints_.size());
  if (current_ < 0) {
    // Start by heading for the waypoint after the nearest one.
    int nearest = 0;
    for (int k = 1; k < n; ++k) {
      if ((waypoints_[k] - leader.position).squaredNorm() <
          (waypoints_[nearest] - leader.position).squaredNorm()) {
        nearest = k;
      }
    }
    current_ = (nearest + 1) % n;
  }
  for (int guard = 0;
       guard < n && (waypoints_[current_] - leader.position).norm() < tolerance_;
       ++guard) {
    current_ = (current_ + 1) % n;
  }
  const double desired = bearing(leader.position, waypoints_[current_]);
  if (!heading_valid_) {
    heading_ = desired;
    heading_valid_ = true;
  } else {
    heading_ = wrap_angle(heading_ + gain_ * wrap_angle(desired - heading_));
  }
  return speed_ * Vec2(std::cos(heading_), std::sin(heading_));
}

std::vector<Vec2> nearest_obstacles(const WorldState& world, int agent_id,
                                    int k, double far_distance) {
  const Vec2 self = world.agent(agent_id).position;
  struct Candidate {
    double dist;
    int id;
    Vec2 v;
  };
  std::vector<Candidate> others;
  for (const auto& a : world.agents) {
    if (a.id == agent_id) continue;
    const Vec2 v = a.position - self;
    others.push_back({v.norm(), a.id, v});
  }
  std::sort(others.begin(), others.end(),
            [](const Candidate& l, const Candidate& r) {
              return l.dist != r.dist ? l.dist < r.dist : l.id < r.id;
            });
  std::vector<Vec2> out;
  for (int i = 0; i < k; ++i) {
    out.push_back(i < static_cast<int>(others.size())
                      ? others[static_cast<std::size_t>(i)].v
                      : Vec2(far_distance, 0.0));
  }
  return out;
}

Polar to_polar(const Vec2& v) {
  if (v.x() == 0.0 && v.y() == 0.0) return {};
  return {v.norm(), bearing(Vec2(Vec2::Zero()), v)};
}

Observation build_observation(const WorldState& world, int agent_id,
                              const Vec2& target_offset, double far_distance) {
  const AgentState& self = world.agent(agent_id);
  if (self.role != AgentRole::Follower) {
    throw InvalidArgument("observation requested for non-follower agent " +
                          std::to_string(agent_id));
  }
  const Vec2 leader = world.leader().position;
  const auto near = nearest_obstacles(world, agent_id, 2, far_distance);
  Observation obs;
  obs.to_leader = to_polar(leader - self.position);
  obs.to_target =
      to_polar(target_position(leader, target_offset) - self.position);
  obs.to_obstacle1 = to_polar(near[0]);
  obs.to_obstacle2 = to_polar(near[1]);
  return obs;
}

std::vector<Polar> all_obstacles(const WorldState& world, int agent_id) {
  const Vec2 self = world.agent(agent_id).position;
  std::vector<Polar> out;
  for (const auto& a : world.agents) {
    if (a.id != agent_id) out.push_back(to_polar(a.position - self));
  }
  return out;
}

Features normalize_observation(const Observation& obs, double d_max) {
  if (!(d_max > 0.0)) throw InvalidArgument("normalize: d_max must be > 0");
  auto dist = [d_max](double d) { return std::min(d, d_max) / d_max; };
  auto ang = [](double th) { return th / std::numbers::pi; };
  Features f;
  f << dist(obs.to_leader.distance), ang(obs.to_leader.bearing),
      dist(obs.to_target.distance), ang(obs.to_target.bearing),
      dist(obs.to_obstacle1.distance), ang(obs.to_obstacle1.bearing),
      dist(obs.to_obstacle2.distance), ang(obs.to_obstacle2.bearing);
  return f;
}

bool detect_collision(const WorldState& world, int agent_id,
                      double robot_radius) {
  const Vec2 self = world.agent(agent_id).position;
  const double limit = 2.0 * robot_radius;
  return std::any_of(world.agents.begin(), world.agents.end(),
                     [&](const AgentState& a) {
                       return a.id != agent_id &&
                              (a.position - self).norm() < limit;
                     });
}

}  // namespace formation
