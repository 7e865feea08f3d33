#include "wncs/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wncs {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stabilizable: return "Stabilizable";
    case Verdict::NotStabilizable: return "NotStabilizable";
    default: return "Inconclusive";
  }
}

namespace {

double rho_sq_checked(const PlantModel& p) {
  if (p.cls == ControllabilityClass::NonFiniteStep)
    throw std::invalid_argument(
        "stability conditions apply to finite-step controllable plants");
  const double r = spectral_radius(p.A);
  return r * r;
}

Verdict static_verdict(double ps, double pc, double threshold) {
  return std::max(ps, pc) < threshold ? Verdict::Stabilizable : Verdict::NotStabilizable;
}

}  // namespace

Verdict check_optimal_static(const PlantModel& p, double ps, double pc) {
  return static_verdict(ps, pc, 1.0 / rho_sq_checked(p));
}

Verdict check_naive_static(const PlantModel& p, double ps, double pc) {
  const double rs = rho_sq_checked(p);
  return static_verdict(ps, pc, 1.0 / (rs * rs));
}

std::pair<bool, bool> check_fading(const PlantModel& p, const MarkovChannel& ch) {
  const double threshold = 1.0 / rho_sq_checked(p);
  const double min_w = *std::min_element(ch.omega.begin(), ch.omega.end());
  const double max_w = *std::max_element(ch.omega.begin(), ch.omega.end());
  const double min_x = *std::min_element(ch.xi.begin(), ch.xi.end());
  const double max_x = *std::max_element(ch.xi.begin(), ch.xi.end());
  const bool necessary = std::max(min_w, min_x) < threshold;
  const bool sufficient = std::max(max_w, max_x) < threshold;
  return {necessary, sufficient};
}

StabilityReport stability_report(const PlantModel& p, const Channel& ch) {
  StabilityReport rep;
  rep.rho_sq = rho_sq_checked(p);
  rep.threshold_optimal = 1.0 / rep.rho_sq;
  rep.threshold_naive = rep.threshold_optimal * rep.threshold_optimal;
  if (const auto* st = std::get_if<StaticChannel>(&ch)) {
    rep.optimal = check_optimal_static(p, st->p_s, st->p_c);
    rep.naive = check_naive_static(p, st->p_s, st->p_c);
    rep.necessary_met = rep.sufficient_met = rep.optimal == Verdict::Stabilizable;
  } else {
    const auto& mk = std::get<MarkovChannel>(ch);
    rep.fading = true;
    const auto [nec, suf] = check_fading(p, mk);
    rep.necessary_met = nec;
    rep.sufficient_met = suf;
    rep.optimal = suf   ? Verdict::Stabilizable
                  : nec ? Verdict::Inconclusive
                        : Verdict::NotStabilizable;
    // no closed-form alternation condition is available for fading links
    rep.naive = Verdict::Inconclusive;
  }
  return rep;
}

bool detect_divergence(const std::vector<double>& running_avg, int window,
                       double growth_factor) {
  if (window < 1) throw std::invalid_argument("divergence window must be positive");
  if (growth_factor <= 1.0)
    throw std::invalid_argument("divergence growth factor must exceed 1");
  if (running_avg.size() < 2 * static_cast<size_t>(window))
    throw std::invalid_argument("trace shorter than two divergence windows");
  for (const double x : running_avg)
    if (!std::isfinite(x)) return true;

  const int nw = static_cast<int>(running_avg.size()) / window;
  std::vector<double> mean(nw, 0.0);
  for (int i = 0; i < nw; ++i) {
    double acc = 0.0;
    for (int j = 0; j < window; ++j) acc += running_avg[static_cast<size_t>(i) * window + j];
    mean[i] = acc / window;
  }
  int streak = 0;
  for (int i = 0; i + 1 < nw; ++i) {
    const bool growing =
        mean[i] <= 0.0 ? mean[i + 1] > 0.0 : mean[i + 1] >= growth_factor * mean[i];
    streak = growing ? streak + 1 : 0;
    if (streak >= 5) return true;
  }
  return false;
}

}  // namespace wncs
