#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "wncs/channel.hpp"
#include "wncs/dynamics.hpp"
#include "wncs/plant.hpp"

namespace wncs {

// Dense enumeration of the truncated indicator space: v register pairs with
// 1 <= tau <= bound, 2 <= phi <= bound, phi >= tau (and, for v = 1 only,
// phi != tau + 1), optionally crossed with fading channel states.
struct TruncatedSpace {
  int bound = 20;
  int v = 1;
  int bs = 1, bc = 1;
  bool fading = false;
  std::vector<std::pair<int, int>> pairs;  // admissible (tau, phi) registers
  std::vector<int> pair_lookup;            // (bound+1)^2 table, -1 = absent
  int n_states = 0;

  static TruncatedSpace make(int bound, int v);
  static TruncatedSpace make(int bound, int v, int bs, int bc);

  int pair_id(int tau, int phi) const {
    return pair_lookup[static_cast<size_t>(tau) * (bound + 1) + phi];
  }
  // exact lookup; -1 when the tuple is not part of the space
  int state_id(const SchedState& s) const;
  // componentwise cap at the bound, plus the v = 1 redirect off the excluded
  // diagonal; total on everything the closed loop can visit
  int clamped_state_id(const SchedState& s) const;
  SchedState state_of(int id) const;
};

// Stage costs plus sparse transition rows, one row per (state, action).
struct Kernel {
  int n_states = 0;
  std::vector<double> cost;
  std::vector<int> row_off;  // size 2*n_states + 1
  std::vector<int> succ;
  std::vector<double> prob;

  int row_begin(int s, Action a) const {
    return row_off[2 * s + (a == Action::Control ? 1 : 0)];
  }
  int row_end(int s, Action a) const {
    return row_off[2 * s + (a == Action::Control ? 1 : 0) + 1];
  }
};

Kernel build_kernel(const TruncatedSpace& space, const PlantModel& p,
                    const Channel& ch, const FTable& f);

struct PolicyTable {
  std::vector<Action> act;
  int bound = 0;
  int v = 1;
  std::string channel_desc;
  double gain = 0.0;
  double residual = 0.0;
  long iterations = 0;
};

struct RviResult {
  PolicyTable policy;
  double gain = 0.0;
  std::vector<double> bias;
  long iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Relative value iteration to span tolerance `tol`. The parallel and serial
// sweeps produce bit-identical iterates; `span_history` (optional) records
// the span of successive value differences.
RviResult solve_rvi(const Kernel& k, double tol = 1e-8, long max_iter = 100000,
                    bool parallel = true,
                    std::vector<double>* span_history = nullptr);

// Long-run average cost of a fixed stationary action table on the kernel.
double evaluate_policy(const Kernel& k, const std::vector<Action>& act,
                       double tol = 1e-8, long max_iter = 200000);

// Long-run average cost of the slot-parity alternation that starts with
// `first`; evaluated by composing the two phase sweeps.
double evaluate_alternating(const Kernel& k, Action first, double tol = 1e-8,
                            long max_iter = 200000);

struct SwitchingReport {
  bool ok = true;
  std::vector<std::pair<int, int>> violations;  // offending state id pairs
};

// Monotone structure over the (tau, phi) grid: once a column switches to
// Sense as tau grows it stays there, and once a row switches to Control as
// phi grows it stays there. v = 1 spaces only.
SwitchingReport verify_switching(const PolicyTable& pt, const TruncatedSpace& space);

void write_policy_csv(std::ostream& os, const TruncatedSpace& space,
                      const PolicyTable& pt,
                      const std::vector<std::string>& header_lines = {});
PolicyTable read_policy_csv(std::istream& is, const TruncatedSpace& space);

}  // namespace wncs
