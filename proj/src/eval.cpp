#include "formation/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace formation {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, int line, const char* field) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("trace line " + std::to_string(line) + ": bad " + field +
                     " '" + s + "'");
  }
}

long long parse_int(const std::string& s, int line, const char* field) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("trace line " + std::to_string(line) + ": bad " + field +
                     " '" + s + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace

void Scenario::validate(const WorldConfig& world) const {
  if (name.empty()) throw ConfigError("scenario: empty name");
  if (steps < 0) throw ConfigError("scenario " + name + ": negative steps");
  if (followers.empty()) {
    throw ConfigError("scenario " + name + ": needs at least one follower");
  }
  if (seeds.empty()) throw ConfigError("scenario " + name + ": no seeds");
  WorldConfig w = world;
  w.leader_mode = leader_mode;
  w.validate();
  const double h = world.arena_half_extent;
  auto inside = [h](const Vec2& p) {
    return std::abs(p.x()) <= h && std::abs(p.y()) <= h;
  };
  if (!inside(leader_start)) {
    throw ConfigError("scenario " + name + ": leader starts outside arena");
  }
  for (const auto& f : followers) {
    if (!inside(f.start)) {
      throw ConfigError("scenario " + name + ": follower starts outside arena");
    }
  }
  for (const auto& o : obstacles) {
    if (!inside(o)) {
      throw ConfigError("scenario " + name + ": obstacle outside arena");
    }
  }
}

Trace run_scenario(const Scenario& scenario, const WorldConfig& world_in,
                   const RewardConfig& reward, const PolicyConfig& policy_cfg,
                   const WeightFile& reach, const WeightFile& keep,
                   std::uint64_t seed) {
  WorldConfig world_cfg = world_in;
  world_cfg.leader_mode = scenario.leader_mode;
  world_cfg.rng_seed = seed;
  scenario.validate(world_cfg);
  if (reach.net.arch() != kDefaultArch || keep.net.arch() != kDefaultArch) {
    throw VersionError("run_scenario: weights do not match the network shape");
  }
  if (reach.d_max != keep.d_max) {
    throw VersionError("run_scenario: reach and keep input scaling differ");
  }
  const double d_max = keep.d_max;

  std::vector<AgentState> agents;
  agents.push_back({0, AgentRole::Leader, scenario.leader_start, Vec2::Zero()});
  const int n_followers = static_cast<int>(scenario.followers.size());
  for (int i = 0; i < n_followers; ++i) {
    agents.push_back({i + 1, AgentRole::Follower,
                      scenario.followers[static_cast<std::size_t>(i)].start,
                      Vec2::Zero()});
  }
  for (std::size_t i = 0; i < scenario.obstacles.size(); ++i) {
    agents.push_back({n_followers + 1 + static_cast<int>(i),
                      AgentRole::Obstacle, scenario.obstacles[i],
                      Vec2::Zero()});
  }
  WorldState world = make_world(std::move(agents));

  auto reach_net = std::make_shared<const Network<double>>(reach.net);
  auto keep_net = std::make_shared<const Network<double>>(keep.net);
  std::vector<DualPolicy> policies(static_cast<std::size_t>(n_followers));
  for (auto& p : policies) {
    p.reach_net = reach_net;
    p.keep_net = keep_net;
    p.switch_radius = policy_cfg.switch_radius;
    p.release_radius = policy_cfg.release_radius;
    p.validate();
  }
  LeaderController leader(scenario.leader_mode, world_cfg);
  Rng rng(seed);

  Trace trace;
  std::vector<int> last_action(static_cast<std::size_t>(n_followers), -1);
  std::vector<double> last_reward(static_cast<std::size_t>(n_followers), 0.0);
  auto record = [&](const WorldState& w) {
    for (const auto& a : w.agents) {
      TraceRecord r;
      r.step = w.step_count;
      r.time = w.time;
      r.agent_id = a.id;
      r.role = a.role;
      r.x = a.position.x();
      r.y = a.position.y();
      if (a.role == AgentRole::Follower) {
        const auto k = static_cast<std::size_t>(a.id - 1);
        r.action = last_action[k];
        r.reward = last_reward[k];
        r.mode = mode_name(policies[k].mode);
        r.dist_err = (target_position(w.leader().position,
                                      scenario.followers[k].offset) -
                      a.position)
                         .norm();
      }
      trace.records.push_back(std::move(r));
    }
  };
  record(world);

  for (int t = 0; t < scenario.steps; ++t) {
    std::map<int, Vec2> commands;
    for (int i = 0; i < n_followers; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const int id = i + 1;
      const Observation obs = build_observation(
          world, id, scenario.followers[k].offset, world_cfg.far_distance);
      auto [action, next] = policy_action(policies[k], obs, d_max);
      policies[k] = std::move(next);
      if (policies[k].mode == PolicyMode::Keeping) {
        last_reward[k] = keep_reward(obs.to_target, action, reward);
      } else {
        const auto obstacles = all_obstacles(world, id);
        last_reward[k] =
            reach_reward(obstacles, obs.to_target, action, reward).total;
      }
      last_action[k] = action.value();
      commands[id] = follower_velocity(action, world_cfg.follower_speed);
    }
    commands[0] = leader.command(world.leader(), world.time, rng);
    world = step_world(world, commands, world_cfg);
    record(world);
  }
  return trace;
}

std::vector<double> distance_error(const Trace& trace, int follower_id) {
  std::vector<double> out;
  for (const auto& r : trace.records) {
    if (r.agent_id != follower_id) continue;
    if (r.role != AgentRole::Follower) {
      throw InvalidArgument("agent " + std::to_string(follower_id) +
                            " is not a follower");
    }
    out.push_back(r.dist_err);
  }
  if (out.empty()) {
    throw InvalidArgument("no follower with id " + std::to_string(follower_id));
  }
  return out;
}

EvalMetrics compute_metrics(const Trace& trace, double robot_radius,
                            std::int64_t from_step) {
  EvalMetrics m;
  m.min_separation = std::numeric_limits<double>::infinity();
  std::map<int, FollowerMetrics> per;
  std::map<int, int> counts;
  std::size_t i = 0;
  const auto& recs = trace.records;
  while (i < recs.size()) {
    std::size_t j = i;
    while (j < recs.size() && recs[j].step == recs[i].step) ++j;
    if (recs[i].step >= from_step) {
      for (std::size_t a = i; a < j; ++a) {
        if (recs[a].role != AgentRole::Follower) continue;
        auto& f = per[recs[a].agent_id];
        f.id = recs[a].agent_id;
        f.mean_error += recs[a].dist_err;
        f.max_error = std::max(f.max_error, recs[a].dist_err);
        f.final_error = recs[a].dist_err;
        ++counts[f.id];
        bool contact = false;
        for (std::size_t b = i; b < j; ++b) {
          if (b == a) continue;
          const double d = std::hypot(recs[a].x - recs[b].x,
                                      recs[a].y - recs[b].y);
          m.min_separation = std::min(m.min_separation, d);
          if (d < 2.0 * robot_radius) contact = true;
        }
        if (contact) {
          ++f.collisions;
          ++m.collision_count;
        }
      }
    }
    i = j;
  }
  for (auto& [id, f] : per) {
    f.mean_error /= counts[id];
    m.followers.push_back(f);
  }
  return m;
}

std::vector<int> time_in_radius(const TrainStats& stats, double radius,
                                int window) {
  if (!(radius > 0.0)) throw InvalidArgument("time_in_radius: radius <= 0");
  if (window <= 0) throw InvalidArgument("time_in_radius: window <= 0");
  std::vector<int> out;
  for (std::size_t e = 0; e < stats.episodes.size(); ++e) {
    if (e % static_cast<std::size_t>(window) == 0) out.push_back(0);
    for (double d : stats.episodes[e].distance_errors) {
      if (d <= radius) ++out.back();
    }
  }
  return out;
}

std::string trace_csv_header() {
  return "step,time,agent_id,role,x,y,action,reward,mode,dist_err\n";
}

std::string trace_to_csv(const Trace& trace) {
  std::string out = trace_csv_header();
  for (const auto& r : trace.records) {
    out += std::to_string(r.step) + ',' + num(r.time) + ',' +
           std::to_string(r.agent_id) + ',' + role_name(r.role) + ',' +
           num(r.x) + ',' + num(r.y) + ',' + std::to_string(r.action) + ',' +
           num(r.reward) + ',' + r.mode + ',' + num(r.dist_err) + '\n';
  }
  return out;
}

Trace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line + "\n" != trace_csv_header()) {
    throw ParseError("trace line 1: unexpected header");
  }
  Trace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) {
      throw ParseError("trace line " + std::to_string(lineno) +
                       ": expected 10 fields, got " + std::to_string(f.size()));
    }
    TraceRecord r;
    r.step = parse_int(f[0], lineno, "step");
    r.time = parse_double(f[1], lineno, "time");
    r.agent_id = static_cast<int>(parse_int(f[2], lineno, "agent_id"));
    try {
      r.role = parse_role(f[3]);
    } catch (const InvalidArgument&) {
      throw ParseError("trace line " + std::to_string(lineno) + ": bad role");
    }
    r.x = parse_double(f[4], lineno, "x");
    r.y = parse_double(f[5], lineno, "y");
    r.action = static_cast<int>(parse_int(f[6], lineno, "action"));
    r.reward = parse_double(f[7], lineno, "reward");
    r.mode = f[8];
    r.dist_err = parse_double(f[9], lineno, "dist_err");
    trace.records.push_back(std::move(r));
  }
  return trace;
}

void export_trace(const Trace& trace, const std::string& path) {
  write_file(path, trace_to_csv(trace));
}

Trace import_trace(const std::string& path) {
  return trace_from_csv(read_file(path));
}

void export_metrics(const EvalMetrics& metrics, const std::string& path) {
  std::string out =
      "follower_id,mean_dist_err,max_dist_err,final_dist_err,collisions\n";
  for (const auto& f : metrics.followers) {
    out += std::to_string(f.id) + ',' + num(f.mean_error) + ',' +
           num(f.max_error) + ',' + num(f.final_error) + ',' +
           std::to_string(f.collisions) + '\n';
  }
  write_file(path, out);
}

std::vector<CompareArm> compare_rewards(const CompareConfig& config) {
  std::vector<CompareArm> out;
  for (std::uint64_t seed : config.seeds) {
    CompareArm arm;
    arm.seed = seed;
    TrainConfig train = config.train;
    train.model_kind = ModelKind::Keep;
    train.rng_seed = seed;
    TaskConfig task = config.task;
    task.model_kind = ModelKind::Keep;

    task.reward_kind = RewardKind::Shaped;
    const auto shaped = formation::train(
        formation_task_factory(config.world, config.reward, task), train);
    arm.shaped = time_in_radius(shaped.stats, config.radius, config.window);

    task.reward_kind =
        config.control ? RewardKind::Shaped : RewardKind::StateOnly;
    const auto state_only = formation::train(
        formation_task_factory(config.world, config.reward, task), train);
    arm.state_only =
        time_in_radius(state_only.stats, config.radius, config.window);
    out.push_back(std::move(arm));
  }
  return out;
}

void export_comparison(const std::vector<CompareArm>& arms,
                       const std::string& path) {
  std::string out = "seed,arm,window,time_in_radius\n";
  for (const auto& a : arms) {
    for (std::size_t w = 0; w < a.shaped.size(); ++w) {
      out += std::to_string(a.seed) + ",state_action," + std::to_string(w) +
             ',' + std::to_string(a.shaped[w]) + '\n';
    }
    for (std::size_t w = 0; w < a.state_only.size(); ++w) {
      out += std::to_string(a.seed) + ",state_only," + std::to_string(w) +
             ',' + std::to_string(a.state_only[w]) + '\n';
    }
  }
  write_file(path, out);
}

}  // namespace formation
