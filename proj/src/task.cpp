#include "formation/task.hpp"

#include <cmath>
#include <numbers>

#include "formation/policy.hpp"

namespace formation {

void TaskConfig::validate() const {
  if (!(target_offset_length >= 0.0)) {
    throw ConfigError("task: target_offset_length < 0");
  }
  if (!(spawn_separation >= 2.0)) {
    throw ConfigError("task: spawn_separation must keep robots apart");
  }
  if (num_obstacles < 0) throw ConfigError("task: negative obstacle count");
  if (!(reach_redirect_period > 0.0)) {
    throw ConfigError("task: reach_redirect_period must be positive");
  }
  if (!(stats_radius > 0.0)) throw ConfigError("task: stats_radius <= 0");
}

FormationTask::FormationTask(WorldConfig world, RewardConfig reward,
                             TaskConfig task)
    : world_cfg_(std::move(world)),
      reward_cfg_(reward),
      task_(task),
      leader_(StaticMotion{}, world_cfg_) {
  world_cfg_.validate();
  reward_cfg_.validate();
  task_.validate();
}

Vec2 FormationTask::sample_point(Rng& rng, const std::vector<Vec2>& taken,
                                 double margin) const {
  const double h = world_cfg_.arena_half_extent - margin;
  std::uniform_real_distribution<double> u(-h, h);
  const double sep = task_.spawn_separation * world_cfg_.robot_radius;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Vec2 p(u(rng), u(rng));
    bool ok = true;
    for (const Vec2& q : taken) ok = ok && (p - q).norm() >= sep;
    if (ok) return p;
  }
  throw ConfigError("task: could not place agents with required separation");
}

Features FormationTask::reset(Rng& rng) {
  const double r = world_cfg_.robot_radius;
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  const double phi = angle(rng);
  offset_ = task_.target_offset_length * Vec2(std::cos(phi), std::sin(phi));

  Vec2 leader_pos;
  LeaderMode mode;
  if (task_.model_kind == ModelKind::Reach) {
    mode = RandomWalkMotion{task_.reach_redirect_period};
    leader_pos = sample_point(rng, {}, r);
  } else {
    std::uniform_int_distribution<int> which(0, 1);
    if (which(rng) == 0) {
      mode = CircleMotion{Vec2::Zero(), task_.circle_radius};
      const double start = angle(rng);
      leader_pos =
          task_.circle_radius * Vec2(std::cos(start), std::sin(start));
    } else {
      mode = SquareMotion{Vec2::Zero(), task_.square_side};
      const auto corners = leader_waypoints(mode, world_cfg_);
      std::uniform_int_distribution<int> pick(0, 3);
      leader_pos = corners[static_cast<std::size_t>(pick(rng))];
    }
  }
  leader_ = LeaderController(mode, world_cfg_);

  std::vector<Vec2> taken{leader_pos};
  Vec2 learner_pos;
  if (task_.model_kind == ModelKind::Keep) {
    learner_pos = target_position(leader_pos, offset_);
    const double h = world_cfg_.arena_half_extent;
    learner_pos = learner_pos.cwiseMax(-h).cwiseMin(h);
  } else {
    learner_pos = sample_point(rng, taken, r);
  }
  taken.push_back(learner_pos);

  if (task_.randomize_obstacles || fixed_obstacles_.empty()) {
    fixed_obstacles_.clear();
    for (int i = 0; i < task_.num_obstacles; ++i) {
      const Vec2 p = sample_point(rng, taken, r);
      fixed_obstacles_.push_back(p);
      taken.push_back(p);
    }
  }

  std::vector<AgentState> agents;
  agents.push_back({kLeaderId, AgentRole::Leader, leader_pos, Vec2::Zero()});
  agents.push_back({kLearnerId, AgentRole::Follower, learner_pos, Vec2::Zero()});
  for (std::size_t i = 0; i < fixed_obstacles_.size(); ++i) {
    agents.push_back({static_cast<int>(i) + 2, AgentRole::Obstacle,
                      fixed_obstacles_[i], Vec2::Zero()});
  }
  world_ = make_world(std::move(agents));
  return observe();
}

Features FormationTask::observe() const {
  return normalize_observation(
      build_observation(world_, kLearnerId, offset_, world_cfg_.far_distance),
      world_cfg_.observation_range);
}

StepOutcome FormationTask::step(ActionIndex action, Rng& rng) {
  // The shaped reward scores the action against the state it was taken in.
  const Observation before =
      build_observation(world_, kLearnerId, offset_, world_cfg_.far_distance);
  double reward = 0.0;
  if (task_.reward_kind == RewardKind::Shaped) {
    if (task_.model_kind == ModelKind::Reach) {
      const auto obstacles = all_obstacles(world_, kLearnerId);
      reward = reach_reward(obstacles, before.to_target, action, reward_cfg_)
                   .total;
    } else {
      reward = keep_reward(before.to_target, action, reward_cfg_);
    }
  }

  std::map<int, Vec2> commands;
  commands[kLeaderId] =
      leader_.command(world_.leader(), world_.time, rng);
  commands[kLearnerId] = follower_velocity(action, world_cfg_.follower_speed);
  world_ = step_world(world_, commands, world_cfg_);

  const Observation after =
      build_observation(world_, kLearnerId, offset_, world_cfg_.far_distance);
  if (task_.reward_kind == RewardKind::StateOnly) {
    reward = state_only_reward(after.to_target);
  }

  StepOutcome out;
  out.next_state =
      normalize_observation(after, world_cfg_.observation_range);
  out.reward = reward;
  out.collision =
      detect_collision(world_, kLearnerId, world_cfg_.robot_radius);
  out.terminal = out.collision;
  out.distance_error = after.to_target.distance;
  return out;
}

EnvFactory formation_task_factory(const WorldConfig& world,
                                  const RewardConfig& reward,
                                  const TaskConfig& task) {
  return [=] { return std::make_unique<FormationTask>(world, reward, task); };
}

}  // namespace formation
