#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "formation/learner.hpp"
#include "formation/policy.hpp"

namespace formation {
namespace {

std::shared_ptr<const Network<double>> biased_net(int best) {
  auto net = std::make_shared<Network<double>>(kDefaultArch);
  net->layers().back().b(best) = 1.0;
  return net;
}

Observation at_distance(double d) {
  Observation obs;
  obs.to_leader = {0.5, 0.0};
  obs.to_target = {d, 0.3};
  obs.to_obstacle1 = {0.5, 0.0};
  obs.to_obstacle2 = {100.0, 0.0};
  return obs;
}

DualPolicy make_policy() {
  DualPolicy p;
  p.reach_net = biased_net(6);
  p.keep_net = biased_net(1);
  return p;
}

TEST(NextMode, Hysteresis) {
  using M = PolicyMode;
  EXPECT_EQ(next_mode(M::Reaching, 0.05, 0.1, 0.25), M::Keeping);
  EXPECT_EQ(next_mode(M::Reaching, 0.1, 0.1, 0.25), M::Keeping);
  EXPECT_EQ(next_mode(M::Reaching, 0.12, 0.1, 0.25), M::Reaching);
  EXPECT_EQ(next_mode(M::Keeping, 0.12, 0.1, 0.25), M::Keeping);
  EXPECT_EQ(next_mode(M::Keeping, 0.25, 0.1, 0.25), M::Keeping);
  EXPECT_EQ(next_mode(M::Keeping, 0.26, 0.1, 0.25), M::Reaching);
}

TEST(PolicyAction, SwitchesAndUsesActiveNet) {
  const DualPolicy p = make_policy();
  auto [far_action, still_reaching] = policy_action(p, at_distance(1.0), 3.0);
  EXPECT_EQ(still_reaching.mode, PolicyMode::Reaching);
  EXPECT_EQ(far_action.value(), 6);

  auto [near_action, keeping] = policy_action(p, at_distance(0.05), 3.0);
  EXPECT_EQ(keeping.mode, PolicyMode::Keeping);
  EXPECT_EQ(near_action.value(), 1);

  auto [band_action, held] = policy_action(keeping, at_distance(0.12), 3.0);
  EXPECT_EQ(held.mode, PolicyMode::Keeping);
  EXPECT_EQ(band_action.value(), 1);
  // The input policy is left untouched.
  EXPECT_EQ(p.mode, PolicyMode::Reaching);
}

TEST(PolicyAction, KeepNetArgmax) {
  auto keep = std::make_shared<Network<double>>(kDefaultArch);
  keep->layers().back().b(0) = 0.1;
  keep->layers().back().b(1) = 0.9;
  DualPolicy p = make_policy();
  p.keep_net = keep;
  p.mode = PolicyMode::Keeping;
  EXPECT_EQ(policy_action(p, at_distance(0.0), 3.0).first.value(), 1);
}

TEST(PolicyAction, ModeDependsOnlyOnDistances) {
  // Two policies with different networks see the same distance sequence.
  DualPolicy a = make_policy();
  DualPolicy b;
  b.reach_net = std::make_shared<Network<double>>(init_network(1));
  b.keep_net = std::make_shared<Network<double>>(init_network(2));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.0, 0.4);
  for (int i = 0; i < 500; ++i) {
    const Observation obs = at_distance(d(rng));
    a = policy_action(a, obs, 3.0).second;
    b = policy_action(b, obs, 3.0).second;
    EXPECT_EQ(a.mode, b.mode);
  }
}

TEST(PolicyAction, IdenticalNetsHideTheSwitch) {
  auto net = std::make_shared<const Network<double>>(init_network(8));
  DualPolicy p;
  p.reach_net = net;
  p.keep_net = net;
  DualPolicy always_reach = p;
  always_reach.switch_radius = 0.0;
  always_reach.release_radius = 0.0;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.0, 2.0), b(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    Observation obs;
    obs.to_leader = {d(rng), b(rng)};
    obs.to_target = {d(rng) * 0.2, b(rng)};
    obs.to_obstacle1 = {d(rng), b(rng)};
    obs.to_obstacle2 = {d(rng) + 2.0, b(rng)};
    auto [x, np] = policy_action(p, obs, 3.0);
    auto [y, nr] = policy_action(always_reach, obs, 3.0);
    EXPECT_EQ(x, y);
    p = np;
    always_reach = nr;
  }
}

TEST(PolicyValidate, Errors) {
  DualPolicy p;
  EXPECT_THROW(p.validate(), ConfigError);
  p = make_policy();
  p.release_radius = 0.05;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_NO_THROW(make_policy().validate());
}

TEST(ModeNames, RoundTrip) {
  EXPECT_EQ(parse_mode(mode_name(PolicyMode::Reaching)), PolicyMode::Reaching);
  EXPECT_EQ(parse_mode(mode_name(PolicyMode::Keeping)), PolicyMode::Keeping);
  EXPECT_THROW(parse_mode("hovering"), InvalidArgument);
}

TEST(FollowerVelocity, Examples) {
  const Vec2 east = follower_velocity(ActionIndex(0), 0.36);
  EXPECT_NEAR(east.x(), 0.36, 1e-15);
  EXPECT_NEAR(east.y(), 0.0, 1e-15);
  const Vec2 west = follower_velocity(ActionIndex(4), 0.36);
  EXPECT_NEAR(west.x(), -0.36, 1e-15);
  EXPECT_NEAR(west.y(), 0.0, 1e-15);
  EXPECT_TRUE(follower_velocity(ActionIndex(3), 0.0).isZero(0.0));
  for (int j = 0; j < kNumActions; ++j) {
    EXPECT_NEAR(follower_velocity(ActionIndex(j), 0.36).norm(), 0.36, 1e-12);
  }
}

}  // namespace
}  // namespace formation
