#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "formation/config.hpp"

namespace formation {
namespace {

nlohmann::json defaults() { return nlohmann::json::parse(default_config_text()); }

TEST(Config, DefaultsMatchTrainingTable) {
  const RunConfig c = default_config();
  EXPECT_EQ(c.train.batch_size, 64);
  EXPECT_EQ(c.train.gamma, 0.99);
  EXPECT_EQ(c.train.learning_rate, 0.0003);
  EXPECT_EQ(c.train.max_steps_per_episode, 300);
  EXPECT_EQ(c.train.replay_capacity, 200000u);
  EXPECT_EQ(c.train.replay_min, 100000u);
  EXPECT_EQ(c.train.epsilon.start, 1.0);
  EXPECT_EQ(c.train.epsilon.decay, 0.9975);
  EXPECT_EQ(c.train.epsilon.floor, 0.05);
  EXPECT_EQ(c.reward.num_actions, 8);
  EXPECT_EQ(c.reward.num_negative_actions, 5);
  EXPECT_EQ(c.world.dt, 0.1);
  EXPECT_EQ(c.policy.switch_radius, 0.1);
}

TEST(Config, ScenariosPresent) {
  const RunConfig c = default_config();
  for (const char* name :
       {"circle", "square", "setup1", "setup2", "setup3", "setup4",
        "fig4-compare"}) {
    EXPECT_NO_THROW(c.scenario(name)) << name;
  }
  EXPECT_THROW(c.scenario("hexagon"), ConfigError);
  const Scenario& circle = c.scenario("circle");
  ASSERT_EQ(circle.followers.size(), 2u);
  EXPECT_EQ(circle.followers[0].offset, Vec2(0.0, 0.5));
  EXPECT_EQ(circle.followers[1].offset, Vec2(0.0, -0.5));
  // Follower start defaults to its formation slot.
  EXPECT_EQ(circle.followers[0].start, Vec2(0.8, 0.5));
  EXPECT_TRUE(std::holds_alternative<CircleMotion>(circle.leader_mode));
  EXPECT_TRUE(std::holds_alternative<StaticMotion>(
      c.scenario("setup3").leader_mode));
}

TEST(Config, UnknownKeysRejected) {
  auto j = defaults();
  j["train"]["momentum"] = 0.9;
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
  j = defaults();
  j["extras"] = 1;
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
  j = defaults();
  j["scenarios"]["circle"]["followers"][0]["speed"] = 1;
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
}

TEST(Config, BadValuesRejected) {
  auto j = defaults();
  j["train"]["gamma"] = 1.5;
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
  j = defaults();
  j["world"]["follower_speed"] = 0.2;  // slower than the leader
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
  j = defaults();
  j["train"]["loss"] = "hinge";
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
  j = defaults();
  j["train"]["batch_size"] = "large";
  EXPECT_THROW(parse_config(j.dump()), ConfigError);
  EXPECT_THROW(parse_config("{ not json"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

TEST(Config, PartialFilesKeepDefaults) {
  const RunConfig c = parse_config(R"({"train": {"episodes": 7, "loss": "huber"}})");
  EXPECT_EQ(c.train.episodes, 7);
  EXPECT_EQ(c.train.loss, LossKind::Huber);
  EXPECT_EQ(c.train.batch_size, 64);
}

TEST(Config, CompareSettings) {
  const CompareConfig cc = default_config().compare_config();
  EXPECT_EQ(cc.train.episodes, 1000);
  EXPECT_EQ(cc.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(cc.window, 10);
  EXPECT_EQ(cc.radius, 0.15);
  EXPECT_FALSE(cc.control);
}

}  // namespace
}  // namespace formation
