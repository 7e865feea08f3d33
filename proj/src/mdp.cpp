#include "wncs/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wncs {

// ---------------------------------------------------------------------------
// state space
// ---------------------------------------------------------------------------

TruncatedSpace TruncatedSpace::make(int bound, int v) { return make(bound, v, 1, 1); }

TruncatedSpace TruncatedSpace::make(int bound, int v, int bs, int bc) {
  if (bound < 3) throw std::invalid_argument("mdp.bound: must be at least 3");
  if (v < 1) throw std::invalid_argument("plant.v: must be at least 1");
  if (bs < 1 || bc < 1) throw std::invalid_argument("channel: state counts must be positive");
  TruncatedSpace sp;
  sp.bound = bound;
  sp.v = v;
  sp.bs = bs;
  sp.bc = bc;
  sp.fading = bs > 1 || bc > 1;
  sp.pair_lookup.assign(static_cast<size_t>(bound + 1) * (bound + 1), -1);
  for (int tau = 1; tau <= bound; ++tau)
    for (int phi = std::max(2, tau); phi <= bound; ++phi) {
      if (v == 1 && phi == tau + 1) continue;  // unreachable after the first slot
      sp.pair_lookup[static_cast<size_t>(tau) * (bound + 1) + phi] =
          static_cast<int>(sp.pairs.size());
      sp.pairs.emplace_back(tau, phi);
    }
  long long n = 1;
  const long long np = static_cast<long long>(sp.pairs.size());
  for (int i = 0; i < v; ++i) {
    n *= np;
    if (n > std::numeric_limits<int>::max() / (bs * bc))
      throw std::invalid_argument("mdp.bound: truncated space too large to enumerate");
  }
  n *= bs * bc;
  sp.n_states = static_cast<int>(n);
  return sp;
}

int TruncatedSpace::state_id(const SchedState& s) const {
  if (static_cast<int>(s.taus.size()) != v) return -1;
  long long id = 0;
  for (int i = 0; i < v; ++i) {
    const int tau = s.taus[i], phi = s.phis[i];
    if (tau < 1 || tau > bound || phi < 1 || phi > bound) return -1;
    const int pid = pair_id(tau, phi);
    if (pid < 0) return -1;
    id = id * static_cast<long long>(pairs.size()) + pid;
  }
  if (fading) {
    if (s.h_s < 0 || s.h_s >= bs || s.h_c < 0 || s.h_c >= bc) return -1;
    id = (id * bs + s.h_s) * bc + s.h_c;
  }
  return static_cast<int>(id);
}

int TruncatedSpace::clamped_state_id(const SchedState& s) const {
  if (static_cast<int>(s.taus.size()) != v)
    throw std::invalid_argument("state has wrong register count for this space");
  long long id = 0;
  for (int i = 0; i < v; ++i) {
    int tau = std::min(s.taus[i], bound);
    int phi = std::min(s.phis[i], bound);
    if (v == 1 && phi == tau + 1) tau += 1;  // cap pushed (tau, phi) onto the excluded diagonal
    const int pid = pair_id(tau, phi);
    if (pid < 0) throw std::invalid_argument("state outside the reachable indicator set");
    id = id * static_cast<long long>(pairs.size()) + pid;
  }
  if (fading) {
    if (s.h_s < 0 || s.h_s >= bs || s.h_c < 0 || s.h_c >= bc)
      throw std::out_of_range("channel state index out of range");
    id = (id * bs + s.h_s) * bc + s.h_c;
  }
  return static_cast<int>(id);
}

SchedState TruncatedSpace::state_of(int id) const {
  if (id < 0 || id >= n_states) throw std::out_of_range("state id out of range");
  SchedState s;
  long long rest = id;
  if (fading) {
    s.h_c = static_cast<int>(rest % bc);
    rest /= bc;
    s.h_s = static_cast<int>(rest % bs);
    rest /= bs;
  }
  s.taus.assign(v, 0);
  s.phis.assign(v, 0);
  const long long np = static_cast<long long>(pairs.size());
  for (int i = v - 1; i >= 0; --i) {
    const auto& pr = pairs[static_cast<size_t>(rest % np)];
    rest /= np;
    s.taus[i] = pr.first;
    s.phis[i] = pr.second;
  }
  return s;
}

// ---------------------------------------------------------------------------
// kernel assembly
// ---------------------------------------------------------------------------

namespace {

void push_entry(std::vector<std::pair<int, double>>& row, int id, double pr) {
  if (pr <= 0.0) return;
  for (auto& e : row)
    if (e.first == id) {
      e.second += pr;
      return;
    }
  row.emplace_back(id, pr);
}

}  // namespace

Kernel build_kernel(const TruncatedSpace& space, const PlantModel& p,
                    const Channel& ch, const FTable& f) {
  if (p.v != space.v)
    throw std::invalid_argument("plant.v: does not match the state space");
  if (f.max_tau() < space.bound)
    throw std::invalid_argument("cost table shallower than the space bound");
  const auto* mk = std::get_if<MarkovChannel>(&ch);
  if (space.fading) {
    if (!mk) throw std::invalid_argument("channel.kind: fading space needs a fading channel");
    if (mk->states(Link::Up) != space.bs || mk->states(Link::Down) != space.bc)
      throw std::invalid_argument("channel: state counts do not match the space");
  } else if (mk) {
    throw std::invalid_argument("channel.kind: static space needs a static channel");
  }

  Kernel k;
  k.n_states = space.n_states;
  k.cost.resize(space.n_states);
  k.row_off.assign(2 * static_cast<size_t>(space.n_states) + 1, 0);

  std::vector<int> taus_tail(space.v > 1 ? space.v - 1 : 0);
  std::vector<int> phis(space.v);
  std::vector<std::pair<int, double>> row;
  row.reserve(32);

  for (int s = 0; s < space.n_states; ++s) {
    SchedState st = space.state_of(s);
    for (int i = 0; i < space.v; ++i) phis[i] = st.phis[i];
    for (int i = 1; i < space.v; ++i) taus_tail[i - 1] = st.taus[i];
    k.cost[s] = stage_cost_vstep(p, f, taus_tail, phis);

    for (int a01 = 0; a01 < 2; ++a01) {
      const Action a = a01 == 0 ? Action::Sense : Action::Control;
      const Link link = a == Action::Sense ? Link::Up : Link::Down;
      const int cur = link == Link::Up ? st.h_s : st.h_c;
      const double pl = loss_prob(ch, link, space.fading ? cur : 0);
      row.clear();
      for (int ok = 0; ok < 2; ++ok) {
        const double w = ok ? 1.0 - pl : pl;
        if (w <= 0.0) continue;
        SchedState nx = sched_transition(st, a, ok != 0);
        if (!space.fading) {
          push_entry(row, space.clamped_state_id(nx), w);
        } else {
          for (int hs2 = 0; hs2 < space.bs; ++hs2)
            for (int hc2 = 0; hc2 < space.bc; ++hc2) {
              const double q = mk->D_s(st.h_s, hs2) * mk->D_c(st.h_c, hc2);
              if (q <= 0.0) continue;
              nx.h_s = hs2;
              nx.h_c = hc2;
              push_entry(row, space.clamped_state_id(nx), w * q);
            }
        }
      }
      k.row_off[2 * static_cast<size_t>(s) + a01 + 1] =
          k.row_off[2 * static_cast<size_t>(s) + a01] + static_cast<int>(row.size());
      for (const auto& e : row) {
        k.succ.push_back(e.first);
        k.prob.push_back(e.second);
      }
    }
  }
  return k;
}

// ---------------------------------------------------------------------------
// solvers
// ---------------------------------------------------------------------------

namespace {

inline double action_value(const Kernel& k, int s, int a01, const double* h) {
  double acc = 0.0;
  const int b = k.row_off[2 * static_cast<size_t>(s) + a01];
  const int e = k.row_off[2 * static_cast<size_t>(s) + a01 + 1];
  for (int i = b; i < e; ++i) acc += k.prob[i] * h[k.succ[i]];
  return acc;
}

inline double best_value(const Kernel& k, int s, const double* h, Action* a) {
  const double qs = action_value(k, s, 0, h);
  const double qc = action_value(k, s, 1, h);
  if (a) *a = qc < qs ? Action::Control : Action::Sense;  // ties go to Sense
  return k.cost[s] + (qc < qs ? qc : qs);
}

void sweep_serial(const Kernel& k, const double* h, double* out, Action* act) {
  for (int s = 0; s < k.n_states; ++s)
    out[s] = best_value(k, s, h, act ? act + s : nullptr);
}

void sweep_parallel(const Kernel& k, const double* h, double* out, Action* act) {
#pragma omp parallel for schedule(static)
  for (int s = 0; s < k.n_states; ++s)
    out[s] = best_value(k, s, h, act ? act + s : nullptr);
}

struct IterStats {
  double gain = 0.0;
  double span = std::numeric_limits<double>::infinity();
};

// span and midpoint of th - h, then h <- th - th[0]
IterStats renormalize(std::vector<double>& h, std::vector<double>& th) {
  double lo = th[0] - h[0], hi = lo;
  const int n = static_cast<int>(h.size());
  for (int s = 1; s < n; ++s) {
    const double d = th[s] - h[s];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  const double ref = th[0];
  for (int s = 0; s < n; ++s) h[s] = th[s] - ref;
  return {0.5 * (lo + hi), hi - lo};
}

}  // namespace

RviResult solve_rvi(const Kernel& k, double tol, long max_iter, bool parallel,
                    std::vector<double>* span_history) {
  const int n = k.n_states;
  std::vector<double> h(n, 0.0), th(n);
  auto sweep = parallel ? sweep_parallel : sweep_serial;
  RviResult r;
  IterStats it_stats;
  long it = 0;
  while (it < max_iter) {
    ++it;
    sweep(k, h.data(), th.data(), nullptr);
    it_stats = renormalize(h, th);
    if (span_history) span_history->push_back(it_stats.span);
    if (it_stats.span < tol) break;
  }
  r.converged = it_stats.span < tol;
  r.iterations = it;
  r.residual = it_stats.span;
  r.gain = it_stats.gain;
  r.bias = h;
  r.policy.act.resize(n);
  sweep(k, h.data(), th.data(), r.policy.act.data());
  r.policy.gain = r.gain;
  r.policy.residual = r.residual;
  r.policy.iterations = r.iterations;
  return r;
}

namespace {

double fixed_policy_gain(const Kernel& k, const int* a01, double tol, long max_iter,
                         const char* what) {
  const int n = k.n_states;
  std::vector<double> h(n, 0.0), th(n);
  for (long it = 0; it < max_iter; ++it) {
    for (int s = 0; s < n; ++s) th[s] = k.cost[s] + action_value(k, s, a01[s], h.data());
    const IterStats st = renormalize(h, th);
    if (st.span < tol) return st.gain;
  }
  throw std::runtime_error(std::string(what) + ": evaluation did not converge");
}

}  // namespace

double evaluate_policy(const Kernel& k, const std::vector<Action>& act, double tol,
                       long max_iter) {
  if (static_cast<int>(act.size()) != k.n_states)
    throw std::invalid_argument("action table size does not match the kernel");
  std::vector<int> a01(act.size());
  for (size_t i = 0; i < act.size(); ++i) a01[i] = act[i] == Action::Control ? 1 : 0;
  return fixed_policy_gain(k, a01.data(), tol, max_iter, "stationary policy");
}

double evaluate_alternating(const Kernel& k, Action first, double tol, long max_iter) {
  const int n = k.n_states;
  const int f01 = first == Action::Control ? 1 : 0;
  std::vector<double> h(n, 0.0), mid(n), th(n);
  for (long it = 0; it < max_iter; ++it) {
    // compose the two phase sweeps so the period-2 chain looks stationary
    for (int s = 0; s < n; ++s) mid[s] = k.cost[s] + action_value(k, s, 1 - f01, h.data());
    for (int s = 0; s < n; ++s) th[s] = k.cost[s] + action_value(k, s, f01, mid.data());
    const IterStats st = renormalize(h, th);
    if (st.span < tol) return 0.5 * st.gain;  // midpoint covers two slots
  }
  throw std::runtime_error("alternating policy: evaluation did not converge");
}

// ---------------------------------------------------------------------------
// policy structure checks and serialization
// ---------------------------------------------------------------------------

SwitchingReport verify_switching(const PolicyTable& pt, const TruncatedSpace& space) {
  if (space.v != 1)
    throw std::invalid_argument("switching check is defined on single-register spaces");
  if (static_cast<int>(pt.act.size()) != space.n_states)
    throw std::invalid_argument("policy table size does not match the space");
  SwitchingReport rep;
  auto id_of = [&](int pid, int hs, int hc) {
    return space.fading ? (pid * space.bs + hs) * space.bc + hc : pid;
  };
  for (int hs = 0; hs < space.bs; ++hs)
    for (int hc = 0; hc < space.bc; ++hc) {
      // along tau (fixed phi): once Sense, stays Sense
      for (int phi = 2; phi <= space.bound; ++phi) {
        int first_sense = -1;
        for (int tau = 1; tau <= phi; ++tau) {
          const int pid = space.pair_id(tau, phi);
          if (pid < 0) continue;
          const int id = id_of(pid, hs, hc);
          if (pt.act[id] == Action::Sense) {
            if (first_sense < 0) first_sense = id;
          } else if (first_sense >= 0) {
            rep.violations.emplace_back(first_sense, id);
          }
        }
      }
      // along phi (fixed tau): once Control, stays Control
      for (int tau = 1; tau <= space.bound; ++tau) {
        int first_ctrl = -1;
        for (int phi = std::max(2, tau); phi <= space.bound; ++phi) {
          const int pid = space.pair_id(tau, phi);
          if (pid < 0) continue;
          const int id = id_of(pid, hs, hc);
          if (pt.act[id] == Action::Control) {
            if (first_ctrl < 0) first_ctrl = id;
          } else if (first_ctrl >= 0) {
            rep.violations.emplace_back(first_ctrl, id);
          }
        }
      }
    }
  rep.ok = rep.violations.empty();
  return rep;
}

void write_policy_csv(std::ostream& os, const TruncatedSpace& space,
                      const PolicyTable& pt,
                      const std::vector<std::string>& header_lines) {
  if (static_cast<int>(pt.act.size()) != space.n_states)
    throw std::invalid_argument("policy table size does not match the space");
  for (const auto& l : header_lines) {
    if (!l.empty() && l[0] == '#')
      os << l << '\n';
    else
      os << "# " << l << '\n';
  }
  for (int i = 0; i < space.v; ++i) os << "tau" << i << ",phi" << i << ",";
  os << "hs,hc,action\n";
  for (int id = 0; id < space.n_states; ++id) {
    const SchedState st = space.state_of(id);
    for (int i = 0; i < space.v; ++i) os << st.taus[i] << ',' << st.phis[i] << ',';
    os << st.h_s << ',' << st.h_c << ','
       << (pt.act[id] == Action::Control ? 2 : 1) << '\n';
  }
}

PolicyTable read_policy_csv(std::istream& is, const TruncatedSpace& space) {
  PolicyTable pt;
  pt.bound = space.bound;
  pt.v = space.v;
  pt.act.assign(space.n_states, Action::Sense);
  std::vector<char> seen(space.n_states, 0);
  std::string line;
  bool header_done = false;
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_done) {  // column header row
      header_done = true;
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<int> vals;
    while (std::getline(ls, field, ',')) vals.push_back(std::stoi(field));
    if (static_cast<int>(vals.size()) != 2 * space.v + 3)
      throw std::invalid_argument("policy csv row has wrong number of fields");
    SchedState st;
    st.taus.assign(space.v, 0);
    st.phis.assign(space.v, 0);
    for (int i = 0; i < space.v; ++i) {
      st.taus[i] = vals[2 * i];
      st.phis[i] = vals[2 * i + 1];
    }
    st.h_s = vals[2 * space.v];
    st.h_c = vals[2 * space.v + 1];
    const int a = vals[2 * space.v + 2];
    if (a != 1 && a != 2) throw std::invalid_argument("policy csv action must be 1 or 2");
    const int id = space.state_id(st);
    if (id < 0) throw std::invalid_argument("policy csv row is not a state of this space");
    if (seen[id]) throw std::invalid_argument("policy csv lists a state twice");
    seen[id] = 1;
    pt.act[id] = a == 2 ? Action::Control : Action::Sense;
    ++rows;
  }
  if (rows != space.n_states)
    throw std::invalid_argument("policy csv does not cover the full state space");
  return pt;
}

}  // namespace wncs
