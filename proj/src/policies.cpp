#include "wncs/policies.hpp"

#include <cmath>
#include <stdexcept>

namespace wncs {

Decision decide(const Policy& pol, const SchedState& s, long slot) {
  struct Visitor {
    const SchedState& s;
    long slot;
    Decision operator()(const PersistentPolicy&) const {
      // sense until the estimate is fresh, then push control inputs
      return s.taus[0] == s.phis[0] ? Decision::Sense : Decision::Control;
    }
    Decision operator()(const RoundRobinPolicy& rr) const {
      const Action even = rr.initial;
      const Action odd = even == Action::Sense ? Action::Control : Action::Sense;
      const Action a = slot % 2 == 0 ? even : odd;
      return a == Action::Sense ? Decision::Sense : Decision::Control;
    }
    Decision operator()(const FullDuplexPolicy&) const { return Decision::Both; }
    Decision operator()(const OptimalPolicy& op) const {
      if (!op.space || !op.table) throw std::invalid_argument("optimal policy not bound");
      const Action a = op.table->act[op.space->clamped_state_id(s)];
      return a == Action::Sense ? Decision::Sense : Decision::Control;
    }
  };
  return std::visit(Visitor{s, slot}, pol);
}

namespace {

// single-register indicator transition, without truncation
std::pair<int, int> next_pair(int tau, int phi, Action a, bool ok) {
  if (a == Action::Control && ok) return {tau + 1, tau + 1};
  return {a == Action::Sense && ok ? 1 : tau + 1, phi + 1};
}

double expected_next_cost(const PlantModel& p, const StaticChannel& ch, const FTable& f,
                          int tau, int phi, Action a) {
  if (a == Action::Sense) return stage_cost_one_step(p, f, phi + 1);
  return ch.p_c * stage_cost_one_step(p, f, phi + 1) +
         (1.0 - ch.p_c) * stage_cost_one_step(p, f, tau + 1);
}

double second_stage_cost(const PlantModel& p, const StaticChannel& ch, const FTable& f,
                         int tau, int phi, Action a1) {
  const double pl = a1 == Action::Sense ? ch.p_s : ch.p_c;
  double acc = 0.0;
  for (int ok = 0; ok < 2; ++ok) {
    const double w = ok ? 1.0 - pl : pl;
    if (w <= 0.0) continue;
    const auto [t1, f1] = next_pair(tau, phi, a1, ok != 0);
    const double qs = expected_next_cost(p, ch, f, t1, f1, Action::Sense);
    const double qc = expected_next_cost(p, ch, f, t1, f1, Action::Control);
    acc += w * std::min(qs, qc);
  }
  return acc;
}

}  // namespace

Action myopic_decide(const PlantModel& p, const StaticChannel& ch, const FTable& f,
                     int tau, int phi) {
  const double cs = expected_next_cost(p, ch, f, tau, phi, Action::Sense);
  const double cc = expected_next_cost(p, ch, f, tau, phi, Action::Control);
  const double scale = std::max({1.0, std::abs(cs), std::abs(cc)});
  if (std::abs(cs - cc) <= 1e-12 * scale) {
    const double s2 = second_stage_cost(p, ch, f, tau, phi, Action::Sense);
    const double c2 = second_stage_cost(p, ch, f, tau, phi, Action::Control);
    return s2 <= c2 * (1.0 + 1e-12) ? Action::Sense : Action::Control;
  }
  return cc < cs ? Action::Control : Action::Sense;
}

std::pair<double, double> persistent_schedule_fractions(double ps, double pc) {
  if (ps < 0.0 || ps >= 1.0 || pc < 0.0 || pc >= 1.0)
    throw std::invalid_argument("loss probabilities must lie in [0, 1)");
  const double es = 1.0 / (1.0 - ps);  // mean slots to get one packet through
  const double ec = 1.0 / (1.0 - pc);
  return {es / (es + ec), ec / (es + ec)};
}

}  // namespace wncs
