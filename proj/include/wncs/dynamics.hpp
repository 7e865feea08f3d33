#pragma once

#include <cstddef>
#include <vector>

#include "wncs/matlite.hpp"
#include "wncs/plant.hpp"

namespace wncs {

enum class Action { Sense = 1, Control = 2 };

struct SchedState {
  std::vector<int> taus, phis;  // registers, index 0 = most recent
  int h_s = -1, h_c = -1;       // channel states, -1 when not fading
};

// v = 1 starts at (2,2); longer registers start at the smallest consistent
// values (all taus 1, all phis 2).
SchedState initial_sched_state(int v);

// Deterministic indicator update for the slot's action and link outcome.
SchedState sched_transition(const SchedState& s, Action a, bool ok);

struct LoopState {
  Vec x, x_hat;
  std::vector<Vec> buffer;  // v queued commands; front entry applied each slot
  int tau = 1, eta = 1;
  SchedState sched;
  Vec scratch_x, scratch_xh;  // slot workspace, not part of the state proper
};

LoopState initial_loop_state(const PlantModel& p, const Vec& x0);

// One closed-loop slot: buffer update, input application, plant evolution,
// estimator update, indicator bookkeeping, in that order. sense/control say
// which links attempted transmission (both true only for the full-duplex
// baseline); up_ok/down_ok are the link outcomes for attempted links.
void step(LoopState& loop, const PlantModel& p, bool sense, bool control,
          bool up_ok, bool down_ok, const Vec& w);

inline void step(LoopState& loop, const PlantModel& p, Action a, bool up_ok,
                 bool down_ok, const Vec& w) {
  step(loop, p, a == Action::Sense, a == Action::Control, up_ok, down_ok, w);
}

// Explicit noise-sum form of the plant state for a given register tuple.
// noises are consumed segment by segment: phi^0 vectors first, then
// phi^j - tau^j vectors for each later segment whose gate is open.
Vec vstep_explicit_state(const PlantModel& p, const std::vector<int>& taus_tail,
                         const std::vector<int>& phis,
                         const std::vector<Vec>& noises);

size_t explicit_state_noise_count(const std::vector<int>& taus_tail,
                                  const std::vector<int>& phis);

}  // namespace wncs
