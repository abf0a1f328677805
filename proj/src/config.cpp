#include "formation/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "default_config.inc"

namespace formation {

namespace {

using nlohmann::json;

// Strict object reader: every access is recorded and leftovers are errors.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Section() = default;

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("");
      }
      out = v.get<T>();
    } catch (const std::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type (" + v.dump() + ")");
    }
  }

  Vec2 vec(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number()) {
      throw ConfigError(path_ + "." + key + ": expected [x, y]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

LeaderMode parse_leader(const json& j, const std::string& path) {
  Section s(j, path);
  std::string mode;
  s.get("mode", mode);
  LeaderMode out;
  if (mode == "circle") {
    CircleMotion c;
    if (s.has("center")) c.center = s.vec("center");
    s.get("radius", c.radius);
    out = c;
  } else if (mode == "square") {
    SquareMotion q;
    if (s.has("center")) q.center = s.vec("center");
    s.get("side", q.side);
    out = q;
  } else if (mode == "random_walk") {
    RandomWalkMotion r;
    s.get("redirect_period", r.redirect_period);
    out = r;
  } else if (mode == "static") {
    out = StaticMotion{};
  } else {
    throw ConfigError(path + ".mode: unknown leader mode '" + mode + "'");
  }
  s.finish();
  return out;
}

Scenario parse_scenario(const std::string& name, const json& j) {
  const std::string path = "scenarios." + name;
  Section s(j, path);
  Scenario sc;
  sc.name = name;
  sc.leader_mode = parse_leader(s.raw("leader"), s.child("leader"));
  if (s.has("leader_start")) sc.leader_start = s.vec("leader_start");
  const json& fol = s.raw("followers");
  if (!fol.is_array()) throw ConfigError(path + ".followers: expected array");
  for (std::size_t i = 0; i < fol.size(); ++i) {
    Section f(fol[i], path + ".followers[" + std::to_string(i) + "]");
    FollowerSpec spec;
    spec.offset = f.vec("offset");
    spec.start = f.has("start") ? f.vec("start")
                                : target_position(sc.leader_start, spec.offset);
    f.finish();
    sc.followers.push_back(spec);
  }
  if (s.has("obstacles")) {
    const json& obs = s.raw("obstacles");
    if (!obs.is_array()) throw ConfigError(path + ".obstacles: expected array");
    for (const auto& o : obs) {
      if (!o.is_array() || o.size() != 2) {
        throw ConfigError(path + ".obstacles: expected [x, y] entries");
      }
      sc.obstacles.emplace_back(o[0].get<double>(), o[1].get<double>());
    }
  }
  s.get("steps", sc.steps);
  s.get("seeds", sc.seeds);
  s.finish();
  return sc;
}

LossKind parse_loss(const std::string& name) {
  if (name == "mse") return LossKind::Mse;
  if (name == "huber") return LossKind::Huber;
  throw ConfigError("train.loss: expected \"mse\" or \"huber\"");
}

}  // namespace

const Scenario& RunConfig::scenario(const std::string& name) const {
  const auto it = scenarios.find(name);
  if (it == scenarios.end()) {
    throw ConfigError("unknown scenario '" + name + "'");
  }
  return it->second;
}

CompareConfig RunConfig::compare_config() const {
  CompareConfig c;
  c.world = world;
  c.reward = reward;
  c.train = train;
  c.train.episodes = compare.episodes;
  c.task = task;
  c.seeds = compare.seeds;
  c.window = compare.window;
  c.radius = compare.radius;
  return c;
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  Section root(doc, "config");

  if (root.has("world")) {
    Section s(root.raw("world"), "world");
    auto& w = cfg.world;
    s.get("dt", w.dt);
    s.get("arena_half_extent", w.arena_half_extent);
    s.get("robot_radius", w.robot_radius);
    s.get("leader_speed", w.leader_speed);
    s.get("follower_speed", w.follower_speed);
    s.get("circle_waypoints", w.circle_waypoints);
    s.get("waypoint_tolerance", w.waypoint_tolerance);
    s.get("heading_gain", w.heading_gain);
    s.get("far_distance", w.far_distance);
    s.get("observation_range", w.observation_range);
    s.get("rng_seed", w.rng_seed);
    if (s.has("leader")) w.leader_mode = parse_leader(s.raw("leader"), "world.leader");
    s.finish();
  }
  if (root.has("reward")) {
    Section s(root.raw("reward"), "reward");
    s.get("num_actions", cfg.reward.num_actions);
    s.get("num_negative_actions", cfg.reward.num_negative_actions);
    s.get("obstacle_epsilon", cfg.reward.obstacle_epsilon);
    s.finish();
  }
  if (root.has("train")) {
    Section s(root.raw("train"), "train");
    auto& t = cfg.train;
    s.get("batch_size", t.batch_size);
    s.get("gamma", t.gamma);
    s.get("learning_rate", t.learning_rate);
    s.get("max_steps_per_episode", t.max_steps_per_episode);
    s.get("replay_capacity", t.replay_capacity);
    s.get("replay_min", t.replay_min);
    s.get("target_sync_period", t.target_sync_period);
    s.get("episodes", t.episodes);
    s.get("epsilon_start", t.epsilon.start);
    s.get("epsilon_decay", t.epsilon.decay);
    s.get("epsilon_floor", t.epsilon.floor);
    s.get("switch_radius", t.switch_radius);
    s.get("rng_seed", t.rng_seed);
    s.get("stats_path", cfg.stats_path);
    if (s.has("loss")) {
      std::string loss;
      s.get("loss", loss);
      t.loss = parse_loss(loss);
    }
    if (s.has("model")) {
      std::string kind;
      s.get("model", kind);
      t.model_kind = parse_model_kind(kind);
    }
    s.finish();
  }
  if (root.has("task")) {
    Section s(root.raw("task"), "task");
    auto& k = cfg.task;
    s.get("target_offset_length", k.target_offset_length);
    s.get("spawn_separation", k.spawn_separation);
    s.get("randomize_obstacles", k.randomize_obstacles);
    s.get("num_obstacles", k.num_obstacles);
    s.get("reach_redirect_period", k.reach_redirect_period);
    s.get("circle_radius", k.circle_radius);
    s.get("square_side", k.square_side);
    s.get("stats_radius", k.stats_radius);
    s.finish();
  }
  if (root.has("policy")) {
    Section s(root.raw("policy"), "policy");
    s.get("switch_radius", cfg.policy.switch_radius);
    s.get("release_radius", cfg.policy.release_radius);
    s.finish();
  }
  if (root.has("compare")) {
    Section s(root.raw("compare"), "compare");
    s.get("episodes", cfg.compare.episodes);
    s.get("seeds", cfg.compare.seeds);
    s.get("window", cfg.compare.window);
    s.get("radius", cfg.compare.radius);
    s.finish();
  }
  if (root.has("scenarios")) {
    const json& sc = root.raw("scenarios");
    if (!sc.is_object()) throw ConfigError("scenarios: expected an object");
    for (auto it = sc.begin(); it != sc.end(); ++it) {
      cfg.scenarios[it.key()] = parse_scenario(it.key(), it.value());
    }
  }
  root.finish();

  cfg.world.validate();
  cfg.reward.validate();
  cfg.train.validate();
  cfg.task.validate();
  if (!(cfg.policy.switch_radius >= 0.0 &&
        cfg.policy.release_radius >= cfg.policy.switch_radius)) {
    throw ConfigError("policy: need 0 <= switch_radius <= release_radius");
  }
  for (const auto& [name, s] : cfg.scenarios) s.validate(cfg.world);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

const std::string& default_config_text() {
  static const std::string text = kDefaultConfigJson;
  return text;
}

RunConfig default_config() { return parse_config(default_config_text()); }

}  // namespace formation
