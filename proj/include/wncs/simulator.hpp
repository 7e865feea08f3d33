#pragma once

#include <cstdint>
#include <vector>

#include "wncs/channel.hpp"
#include "wncs/dynamics.hpp"
#include "wncs/policies.hpp"
#include "wncs/stability.hpp"

namespace wncs {

struct ExperimentConfig {
  const PlantModel* plant = nullptr;
  Channel channel = StaticChannel{};
  Policy policy = PersistentPolicy{};
  long horizon = 10000;  // slots per replication
  int replications = 100;
  uint64_t seed = 1;
  Vec x0;
  int div_window = 10000;
  double div_growth = 1.5;
  // keep replication 0's per-slot decisions and costs (for cycle statistics)
  bool collect_trace = false;
};

struct SimResult {
  // running average sampled on a slot grid (at most ~2000 points), with the
  // across-replication mean and standard error at each sample
  std::vector<long> sample_slots;
  std::vector<double> running_mean;
  std::vector<double> running_se;
  // end-of-horizon average cost, one entry per replication
  std::vector<double> final_costs;
  double mean_cost = 0.0;
  double stderr_cost = 0.0;
  // fraction of slots per request kind, summing to 1
  double sense_frac = 0.0;
  double control_frac = 0.0;
  double both_frac = 0.0;
  bool diverged = false;  // any replication tripped the window detector
  std::vector<Decision> trace_decisions;
  std::vector<double> trace_costs;
};

// Closed-loop Monte-Carlo engine. Each slot: policy decision, channel outcome
// draws, one dynamics step, cost accrual on the post-step state. The physical
// state is never truncated; only table lookups cap the indicators.
// Replications use independent derived streams and are reduced in index
// order, so results are bit-identical for a given (config, seed) regardless
// of thread count. The divergence detector runs per replication whenever the
// horizon covers at least two windows.
SimResult run(const ExperimentConfig& cfg);

struct CycleStats {
  double mean_cost = 0.0;  // mean summed cost per cycle
  double mean_len = 0.0;   // mean cycle length in slots
  double ratio = 0.0;      // mean_cost / mean_len
  long cycles = 0;
};

// Renewal decomposition of a persistent-policy trace into cycles of one
// maximal Sense-block followed by one maximal Control-block. Needs at least
// 100 complete cycles.
CycleStats cycle_stats(const std::vector<Decision>& decisions,
                       const std::vector<double>& costs);

}  // namespace wncs
