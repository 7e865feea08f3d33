#include "wncs/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wncs/rng.hpp"

namespace wncs {

namespace {

std::vector<long> sample_grid(long horizon) {
  const long stride = std::max(1L, horizon / 2000);
  std::vector<long> slots;
  slots.reserve(static_cast<size_t>(horizon / stride) + 1);
  for (long k = stride; k <= horizon; k += stride) slots.push_back(k);
  if (slots.empty() || slots.back() != horizon) slots.push_back(horizon);
  return slots;
}

struct RepCounts {
  long sense = 0, control = 0, both = 0;
};

void validate_config(const ExperimentConfig& cfg) {
  if (!cfg.plant) throw std::invalid_argument("sim: plant not set");
  if (cfg.horizon < 1) throw std::invalid_argument("sim.K: must be at least 1");
  if (cfg.replications < 1)
    throw std::invalid_argument("sim.replications: must be at least 1");
  if (static_cast<int>(cfg.x0.size()) != cfg.plant->n)
    throw std::invalid_argument("sim.x0: dimension does not match the plant");
  if (const auto* op = std::get_if<OptimalPolicy>(&cfg.policy)) {
    if (!op->space || !op->table)
      throw std::invalid_argument("policy: optimal lookup needs a solved table");
    if (static_cast<int>(op->table->act.size()) != op->space->n_states)
      throw std::invalid_argument("policy: table does not match its space");
    if (op->space->v != cfg.plant->v)
      throw std::invalid_argument("policy: table register count does not match the plant");
    const bool markov = std::holds_alternative<MarkovChannel>(cfg.channel);
    if (op->space->fading != markov)
      throw std::invalid_argument("policy: table channel kind does not match the channel");
    if (markov) {
      const auto& mk = std::get<MarkovChannel>(cfg.channel);
      if (op->space->bs != mk.states(Link::Up) || op->space->bc != mk.states(Link::Down))
        throw std::invalid_argument("policy: table channel states do not match the channel");
    }
  }
}

}  // namespace

SimResult run(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const PlantModel& p = *cfg.plant;
  const auto* mk = std::get_if<MarkovChannel>(&cfg.channel);
  const long K = cfg.horizon;
  const int reps = cfg.replications;
  const int n = p.n;

  const std::vector<long> slots = sample_grid(K);
  const int ns = static_cast<int>(slots.size());

  std::vector<double> rep_running(static_cast<size_t>(reps) * ns);
  std::vector<double> rep_final(reps);
  std::vector<RepCounts> rep_counts(reps);
  std::vector<char> rep_diverged(reps, 0);
  const bool track_divergence = K >= 2L * cfg.div_window;

  SimResult out;
  if (cfg.collect_trace) {
    out.trace_decisions.resize(static_cast<size_t>(K));
    out.trace_costs.resize(static_cast<size_t>(K));
  }

#pragma omp parallel for schedule(dynamic)
  for (int rep = 0; rep < reps; ++rep) {
    Rng g = replication_stream(cfg.seed, rep);
    LoopState ls = initial_loop_state(p, cfg.x0);
    if (mk) {
      ls.sched.h_s = 0;
      ls.sched.h_c = 0;
    }
    Vec w(n), z(n);
    std::vector<double> avg_trace;
    if (track_divergence) avg_trace.resize(static_cast<size_t>(K));
    RepCounts& counts = rep_counts[rep];
    double cum = 0.0;
    int next_sample = 0;
    for (long k = 0; k < K; ++k) {
      const Decision dec = decide(cfg.policy, ls.sched, k);
      const bool try_up = dec != Decision::Control;
      const bool try_down = dec != Decision::Sense;
      if (dec == Decision::Both)
        counts.both += 1;
      else if (dec == Decision::Sense)
        counts.sense += 1;
      else
        counts.control += 1;

      // fixed per-slot draw layout: two outcome uniforms, the channel state
      // steps (fading only), then the noise pairs
      const double u_up = g.uniform();
      const double u_down = g.uniform();
      const bool up_ok = try_up && u_up >= loss_prob(cfg.channel, Link::Up,
                                                     mk ? ls.sched.h_s : 0);
      const bool down_ok = try_down && u_down >= loss_prob(cfg.channel, Link::Down,
                                                           mk ? ls.sched.h_c : 0);
      if (mk) {
        ls.sched.h_s = step_channel_state(*mk, Link::Up, ls.sched.h_s, g);
        ls.sched.h_c = step_channel_state(*mk, Link::Down, ls.sched.h_c, g);
      }
      for (int i = 0; i < n; i += 2) {
        double z0, z1;
        normal_pair(g, z0, z1);
        z[i] = z0;
        if (i + 1 < n) z[i + 1] = z1;
      }
      for (int i = 0; i < n; ++i) {  // shape through the noise factor
        double acc = 0.0;
        for (int j = 0; j <= i; ++j) acc += p.R_chol(i, j) * z[j];
        w[i] = acc;
      }

      step(ls, p, try_up, try_down, up_ok, down_ok, w);

      double c = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) c += ls.x[i] * p.Q(i, j) * ls.x[j];
      cum += c;
      const double avg = cum / static_cast<double>(k + 1);
      if (track_divergence) avg_trace[static_cast<size_t>(k)] = avg;
      if (next_sample < ns && k + 1 == slots[next_sample]) {
        rep_running[static_cast<size_t>(rep) * ns + next_sample] = avg;
        ++next_sample;
      }
      if (cfg.collect_trace && rep == 0) {
        out.trace_decisions[static_cast<size_t>(k)] = dec;
        out.trace_costs[static_cast<size_t>(k)] = c;
      }
    }
    rep_final[rep] = cum / static_cast<double>(K);
    if (track_divergence)
      rep_diverged[rep] = detect_divergence(avg_trace, cfg.div_window, cfg.div_growth);
  }

  // ordered reduction over replications
  out.sample_slots = slots;
  out.running_mean.assign(ns, 0.0);
  out.running_se.assign(ns, 0.0);
  for (int rep = 0; rep < reps; ++rep)
    for (int i = 0; i < ns; ++i)
      out.running_mean[i] += rep_running[static_cast<size_t>(rep) * ns + i];
  for (int i = 0; i < ns; ++i) out.running_mean[i] /= reps;
  if (reps > 1) {
    for (int rep = 0; rep < reps; ++rep)
      for (int i = 0; i < ns; ++i) {
        const double d = rep_running[static_cast<size_t>(rep) * ns + i] - out.running_mean[i];
        out.running_se[i] += d * d;
      }
    for (int i = 0; i < ns; ++i)
      out.running_se[i] = std::sqrt(out.running_se[i] / (reps - 1.0) / reps);
  }

  out.final_costs = rep_final;
  double mean = 0.0;
  for (const double v : rep_final) mean += v;
  mean /= reps;
  out.mean_cost = mean;
  if (reps > 1) {
    double var = 0.0;
    for (const double v : rep_final) var += (v - mean) * (v - mean);
    out.stderr_cost = std::sqrt(var / (reps - 1.0) / reps);
  }

  long tot_sense = 0, tot_control = 0, tot_both = 0;
  for (const auto& c : rep_counts) {
    tot_sense += c.sense;
    tot_control += c.control;
    tot_both += c.both;
  }
  const double total = static_cast<double>(K) * reps;
  out.sense_frac = tot_sense / total;
  out.control_frac = tot_control / total;
  out.both_frac = tot_both / total;

  for (int rep = 0; rep < reps; ++rep) out.diverged = out.diverged || rep_diverged[rep];
  return out;
}

CycleStats cycle_stats(const std::vector<Decision>& decisions,
                       const std::vector<double>& costs) {
  if (decisions.size() != costs.size())
    throw std::invalid_argument("cycle decomposition needs matching decision and cost traces");
  CycleStats st;
  double sum_cost = 0.0;
  long sum_len = 0;
  size_t i = 0;
  const size_t n = decisions.size();
  while (i < n) {
    if (decisions[i] != Decision::Sense) {  // skip any leading partial cycle
      ++i;
      continue;
    }
    size_t j = i;
    double c = 0.0;
    while (j < n && decisions[j] == Decision::Sense) c += costs[j], ++j;
    if (j == n || decisions[j] != Decision::Control) break;  // incomplete tail
    while (j < n && decisions[j] == Decision::Control) c += costs[j], ++j;
    if (j == n) break;  // control block may continue past the trace end
    st.cycles += 1;
    sum_cost += c;
    sum_len += static_cast<long>(j - i);
    i = j;
  }
  if (st.cycles < 100)
    throw std::runtime_error("fewer than 100 complete cycles in the trace");
  st.mean_cost = sum_cost / static_cast<double>(st.cycles);
  st.mean_len = static_cast<double>(sum_len) / static_cast<double>(st.cycles);
  st.ratio = st.mean_cost / st.mean_len;
  return st;
}

}  // namespace wncs
