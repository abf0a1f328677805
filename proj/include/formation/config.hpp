#pragma once

#include <map>
#include <string>

#include "formation/eval.hpp"

namespace formation {

struct CompareSettings {
  std::int64_t episodes = 1000;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int window = 10;
  double radius = 0.15;
};

/// Everything a run needs, as read from a JSON config file. Unknown keys are
/// rejected.
struct RunConfig {
  WorldConfig world;
  RewardConfig reward;
  TrainConfig train;
  TaskConfig task;
  PolicyConfig policy;
  CompareSettings compare;
  std::string stats_path;  // empty: derived from the weights path
  std::map<std::string, Scenario> scenarios;

  const Scenario& scenario(const std::string& name) const;
  CompareConfig compare_config() const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// The bundled defaults (config/default.json compiled in).
const std::string& default_config_text();
RunConfig default_config();

}  // namespace formation
