#pragma once

#include <vector>

#include "formation/env.hpp"
#include "formation/learner.hpp"
#include "formation/reward.hpp"

namespace formation {

enum class RewardKind { Shaped, StateOnly };

/// Episode generator for one learning follower: leader, learner and two
/// stationary obstacles in the arena.
struct TaskConfig {
  ModelKind model_kind = ModelKind::Reach;
  RewardKind reward_kind = RewardKind::Shaped;
  double target_offset_length = 0.5;  // m, direction drawn per episode
  double spawn_separation = 4.0;      // in robot radii
  bool randomize_obstacles = true;    // redraw obstacle spots every episode
  int num_obstacles = 2;
  double reach_redirect_period = 2.0;  // s, random-walk leader while reaching
  double circle_radius = 0.8;          // keep-model trajectory leaders
  double square_side = 1.2;
  double stats_radius = 0.15;  // m

  void validate() const;
};

class FormationTask final : public TrainingEnv {
 public:
  FormationTask(WorldConfig world, RewardConfig reward, TaskConfig task);

  Features reset(Rng& rng) override;
  StepOutcome step(ActionIndex action, Rng& rng) override;
  double stats_radius() const override { return task_.stats_radius; }

  const WorldState& world() const { return world_; }
  const Vec2& target_offset() const { return offset_; }

  static constexpr int kLeaderId = 0;
  static constexpr int kLearnerId = 1;

 private:
  Features observe() const;
  Vec2 sample_point(Rng& rng, const std::vector<Vec2>& taken,
                    double margin) const;

  WorldConfig world_cfg_;
  RewardConfig reward_cfg_;
  TaskConfig task_;
  WorldState world_;
  LeaderController leader_;
  Vec2 offset_ = Vec2::Zero();
  std::vector<Vec2> fixed_obstacles_;
};

EnvFactory formation_task_factory(const WorldConfig& world,
                                  const RewardConfig& reward,
                                  const TaskConfig& task);

}  // namespace formation
