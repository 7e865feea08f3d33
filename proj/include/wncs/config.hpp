#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wncs/channel.hpp"
#include "wncs/plant.hpp"

namespace wncs {

// JSON experiment description. Sections: plant, channel, policy, sim
// (required) and mdp, sweep (optional). Unknown keys are rejected and every
// diagnostic names the offending key.
struct RunConfig {
  // plant
  Mat A, B, K, Q, R;
  int v = 1;
  // channel
  Channel channel = StaticChannel{};
  // policy
  std::string policy_kind = "persistent";
  // sim
  long horizon = 10000;
  int replications = 100;
  uint64_t seed = 1;
  Vec x0;
  int div_window = 10000;
  double div_growth = 1.5;
  // mdp
  int bound = 20;
  double tol = 1e-8;
  long max_iter = 100000;
  // sweep grids (empty = no sweep on that axis)
  std::vector<double> sweep_ps, sweep_pc;
  std::vector<int> sweep_v;

  bool has_sweep() const {
    return !sweep_ps.empty() || !sweep_pc.empty() || !sweep_v.empty();
  }
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

// Canonical serialization: sorted keys, defaults materialized. Parsing the
// dump reproduces the config exactly.
std::string dump_config(const RunConfig& cfg);

// FNV-1a over the canonical dump; embedded in output headers so artifacts
// can be traced back to the exact configuration.
uint64_t config_hash(const RunConfig& cfg);

PlantModel build_plant(const RunConfig& cfg);

const std::vector<std::string>& valid_policy_kinds();

}  // namespace wncs
