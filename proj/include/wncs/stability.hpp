#pragma once

#include <utility>
#include <vector>

#include "wncs/channel.hpp"
#include "wncs/plant.hpp"

namespace wncs {

enum class Verdict { Stabilizable, NotStabilizable, Inconclusive };

const char* to_string(Verdict v);

// Closed-form stabilizability checks for finite-step controllable plants.
// The half-duplex optimal/persistent schedulers tolerate losses up to
// 1/rho^2(A) on the worse link; strict alternation only up to 1/rho^4(A).
struct StabilityReport {
  double rho_sq = 0.0;
  double threshold_optimal = 0.0;  // 1 / rho^2(A)
  double threshold_naive = 0.0;    // 1 / rho^4(A)
  Verdict optimal = Verdict::Inconclusive;
  Verdict naive = Verdict::Inconclusive;
  // fading-channel condition flags; equal to the static comparison when the
  // channel has a single state per link
  bool fading = false;
  bool necessary_met = false;
  bool sufficient_met = false;
};

Verdict check_optimal_static(const PlantModel& p, double ps, double pc);
Verdict check_naive_static(const PlantModel& p, double ps, double pc);

// (necessary_met, sufficient_met): the best link state must beat 1/rho^2 for
// stabilizability to be possible at all; every link state beating it is
// enough. In between the verdict stays open.
std::pair<bool, bool> check_fading(const PlantModel& p, const MarkovChannel& ch);

StabilityReport stability_report(const PlantModel& p, const Channel& ch);

// Empirical divergence flag on a running-average cost trace: split the trace
// into consecutive windows and flag when five window-pair ratios in a row
// reach the growth factor. Non-finite samples flag immediately.
bool detect_divergence(const std::vector<double>& running_avg, int window = 10000,
                       double growth_factor = 1.5);

}  // namespace wncs
