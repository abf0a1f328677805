#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "formation/reward.hpp"

namespace formation {
namespace {

constexpr double kPi = std::numbers::pi;
const ActionIndex kEast(0);

TEST(DistanceReward, Examples) {
  EXPECT_EQ(distance_reward(0.0), 1.0);
  EXPECT_EQ(distance_reward(1.0), 2.0);
  EXPECT_NEAR(distance_reward(2.5), 4.0 * std::sqrt(2.0), 1e-12);
  EXPECT_THROW(distance_reward(-0.1), InvalidArgument);
}

TEST(AlignmentReward, Examples) {
  EXPECT_NEAR(alignment_reward(0.0, kEast), 0.375, 1e-12);
  EXPECT_NEAR(alignment_reward(kPi, kEast), -0.625, 1e-12);
  EXPECT_NEAR(alignment_reward(3 * kPi / 8, kEast), 0.0, 1e-12);
  EXPECT_NEAR(alignment_reward(-3 * kPi / 8, kEast), 0.0, 1e-12);
}

TEST(AlignmentReward, SignBoundary) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 2000; ++i) {
    const double b = u(rng);
    for (int j = 0; j < kNumActions; ++j) {
      const ActionIndex a(j);
      const double delta = angular_difference(b, action_angle(a));
      const double r = alignment_reward(b, a);
      if (std::abs(delta - 3 * kPi / 8) < 1e-9) continue;
      EXPECT_EQ(r > 0.0, delta < 3 * kPi / 8);
      EXPECT_GE(r, -0.625 - 1e-12);
      EXPECT_LE(r, 0.375 + 1e-12);
    }
  }
}

TEST(AlignmentReward, MaximalForClosestDirection) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    const double b = u(rng);
    int best_r = 0, best_d = 0;
    for (int j = 1; j < kNumActions; ++j) {
      const ActionIndex a(j);
      if (alignment_reward(b, a) > alignment_reward(b, ActionIndex(best_r)))
        best_r = j;
      if (angular_difference(b, action_angle(a)) <
          angular_difference(b, action_angle(ActionIndex(best_d))))
        best_d = j;
    }
    EXPECT_EQ(best_r, best_d);
  }
}

TEST(TargetReward, Examples) {
  EXPECT_NEAR(target_reward({1.0, 0.0}, kEast), 0.75, 1e-12);
  for (int j = 0; j < kNumActions; ++j) {
    const ActionIndex a(j);
    EXPECT_NEAR(target_reward({0.0, action_angle(a)}, a), 0.375, 1e-12);
  }
  EXPECT_NEAR(target_reward({2.0, kPi}, kEast), -2.5, 1e-12);
}

TEST(ObstacleReward, Examples) {
  EXPECT_NEAR(obstacle_reward({0.9, 0.0}, kEast), 0.75, 1e-12);
  EXPECT_NEAR(obstacle_reward({0.0, 0.0}, kEast), 384.0, 1e-9);
  EXPECT_NEAR(obstacle_reward({9.9, kPi}, kEast),
              std::pow(2.0, 0.1) * -0.625, 1e-12);
  EXPECT_NEAR(obstacle_reward({9.9, kPi}, kEast), -0.6699, 1e-4);
}

TEST(ObstacleReward, FactorRange) {
  for (double d : {0.0, 0.01, 0.5, 1.0, 10.0, 100.0}) {
    const double f = obstacle_reward({d, 0.0}, kEast) / 0.375;
    EXPECT_GT(f, 1.0);
    EXPECT_LE(f, 1024.0 + 1e-9);
  }
}

TEST(ReachReward, Examples) {
  const std::vector<Polar> one = {{0.9, kPi}};
  const auto r = reach_reward(one, {1.0, 0.0}, kEast);
  EXPECT_NEAR(r.target, 0.75, 1e-12);
  EXPECT_NEAR(r.obstacle_max, -1.25, 1e-12);
  EXPECT_NEAR(r.total, 2.0, 1e-12);

  const auto none = reach_reward({}, {1.0, 0.0}, kEast);
  EXPECT_EQ(none.total, target_reward({1.0, 0.0}, kEast));
  EXPECT_EQ(none.obstacle_max, 0.0);
}

TEST(ReachReward, SubtractsLargestObstacleTerm) {
  // Bearings chosen so the two obstacle terms are 0.5 and -1.0 for action 0.
  const double d1 = 1.0 / std::log2(0.5 / 0.375) - 0.1;  // factor 4/3, aligned
  const double d2 = 1.0 / std::log2(1.6) - 0.1;           // factor 1.6, opposed
  const std::vector<Polar> obs = {{d1, 0.0}, {d2, kPi}};
  EXPECT_NEAR(obstacle_reward(obs[0], kEast), 0.5, 1e-12);
  EXPECT_NEAR(obstacle_reward(obs[1], kEast), -1.0, 1e-12);
  const auto r = reach_reward(obs, {1.0, 0.0}, kEast);
  EXPECT_NEAR(r.total, 0.75 - 0.5, 1e-12);
}

TEST(KeepReward, MatchesReachWithoutObstacles) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(0.0, 3.0), b(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const Polar t{d(rng), b(rng)};
    const ActionIndex a(i % kNumActions);
    EXPECT_EQ(keep_reward(t, a), reach_reward({}, t, a).total);
  }
  EXPECT_NEAR(keep_reward({0.1, 0.0}, kEast), std::pow(2.0, 0.1) * 0.375,
              1e-12);
  EXPECT_NEAR(keep_reward({0.1, 0.0}, kEast), 0.4019, 1e-4);
}

TEST(StateOnlyReward, Examples) {
  EXPECT_EQ(state_only_reward({0.0, 0.0}), 0.0);
  EXPECT_EQ(state_only_reward({1.0, 1.0}), -1.0);
  EXPECT_EQ(state_only_reward({2.5, -2.0}), -2.5);
}

TEST(RewardConfig, Validation) {
  RewardConfig c;
  c.validate();
  c.num_negative_actions = 8;
  EXPECT_THROW(c.validate(), ConfigError);
}

}  // namespace
}  // namespace formation
