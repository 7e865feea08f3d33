#pragma once

#include <utility>
#include <variant>

#include "wncs/channel.hpp"
#include "wncs/mdp.hpp"

namespace wncs {

// What a scheduler asks of the radio in one slot. A half-duplex scheduler
// returns Sense or Control; the full-duplex benchmark uses both links.
enum class Decision { Sense = 1, Control = 2, Both = 3 };

struct PersistentPolicy {};

// slot parity alternation, regardless of outcomes
struct RoundRobinPolicy {
  Action initial = Action::Sense;
};

struct FullDuplexPolicy {};

// table lookup on the truncated space; out-of-range indicators are capped
struct OptimalPolicy {
  const TruncatedSpace* space = nullptr;
  const PolicyTable* table = nullptr;
};

using Policy =
    std::variant<PersistentPolicy, RoundRobinPolicy, FullDuplexPolicy, OptimalPolicy>;

Decision decide(const Policy& pol, const SchedState& s, long slot);

// Two-stage lookahead for a one-step-controllable plant on a static channel:
// pick the action with the smaller expected next-stage cost, breaking the
// tau == phi tie by the expected cost one slot further out.
Action myopic_decide(const PlantModel& p, const StaticChannel& ch, const FTable& f,
                     int tau, int phi);

// Long-run (sense, control) slot fractions of the persistent rule: block
// lengths are geometric, so each link contributes its mean retry count.
std::pair<double, double> persistent_schedule_fractions(double ps, double pc);

}  // namespace wncs
