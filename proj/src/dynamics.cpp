#include "wncs/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

namespace wncs {

namespace {

void indicator_update(std::vector<int>& taus, std::vector<int>& phis, bool s_ok,
                      bool c_ok) {
  int v = static_cast<int>(taus.size());
  if (c_ok) {
    int t0 = taus[0];
    for (int i = v - 1; i >= 1; --i) {
      taus[i] = taus[i - 1];
      phis[i] = phis[i - 1];
    }
    taus[0] = t0 + 1;
    phis[0] = t0 + 1;
  } else {
    taus[0] += 1;
    phis[0] += 1;
  }
  if (s_ok) taus[0] = 1;
}

}  // namespace

SchedState initial_sched_state(int v) {
  SchedState s;
  s.taus.assign(v, 1);
  s.phis.assign(v, 2);
  if (v == 1) s.taus[0] = 2;
  return s;
}

SchedState sched_transition(const SchedState& s, Action a, bool ok) {
  SchedState r = s;
  indicator_update(r.taus, r.phis, a == Action::Sense && ok,
                   a == Action::Control && ok);
  return r;
}

LoopState initial_loop_state(const PlantModel& p, const Vec& x0) {
  if (static_cast<int>(x0.size()) != p.n)
    throw std::invalid_argument("sim.x0: dimension does not match the plant");
  LoopState loop;
  loop.x = x0;
  loop.x_hat = x0;
  loop.buffer.assign(p.v, Vec(p.m, 0.0));
  loop.sched = initial_sched_state(p.v);
  loop.tau = loop.sched.taus[0];
  loop.eta = 1;
  loop.scratch_x.assign(p.n, 0.0);
  loop.scratch_xh.assign(p.n, 0.0);
  return loop;
}

void step(LoopState& loop, const PlantModel& p, bool sense, bool control,
          bool up_ok, bool down_ok, const Vec& w) {
  const int n = p.n, m = p.m, v = p.v;
  const bool s_ok = sense && up_ok;
  const bool c_ok = control && down_ok;

  // (a) command buffer: refill from the current estimate on a successful
  //     reception, otherwise shift left and pad with zero
  if (c_ok) {
    for (int j = 0; j < v; ++j) {
      const Mat& km = p.KM[j];
      for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += km(i, k) * loop.x_hat[k];
        loop.buffer[j][i] = s;
      }
    }
  } else {
    for (int j = 0; j + 1 < v; ++j) loop.buffer[j] = loop.buffer[j + 1];
    std::fill(loop.buffer[v - 1].begin(), loop.buffer[v - 1].end(), 0.0);
  }

  // (b) applied input is the front of the updated buffer
  const Vec& u = loop.buffer[0];

  // (c) plant and (d) estimator, both from pre-step quantities
  for (int i = 0; i < n; ++i) {
    double ax = 0.0, axh = 0.0, bu = 0.0;
    for (int k = 0; k < n; ++k) {
      ax += p.A(i, k) * loop.x[k];
      axh += p.A(i, k) * loop.x_hat[k];
    }
    for (int k = 0; k < m; ++k) bu += p.B(i, k) * u[k];
    loop.scratch_x[i] = ax + bu + w[i];
    loop.scratch_xh[i] = (s_ok ? ax : axh) + bu;
  }
  std::swap(loop.x, loop.scratch_x);
  std::swap(loop.x_hat, loop.scratch_xh);

  // (e) indicators
  indicator_update(loop.sched.taus, loop.sched.phis, s_ok, c_ok);
  loop.tau = s_ok ? 1 : loop.tau + 1;
  loop.eta = c_ok ? 1 : loop.eta + 1;
}

size_t explicit_state_noise_count(const std::vector<int>& taus_tail,
                                  const std::vector<int>& phis) {
  size_t count = static_cast<size_t>(phis[0]);
  for (size_t j = 1; j < phis.size(); ++j) {
    int tau_j = taus_tail[j - 1];
    if (phis[j] > tau_j) count += static_cast<size_t>(phis[j] - tau_j);
  }
  return count;
}

Vec vstep_explicit_state(const PlantModel& p, const std::vector<int>& taus_tail,
                         const std::vector<int>& phis,
                         const std::vector<Vec>& noises) {
  if (phis.empty() || taus_tail.size() + 1 != phis.size())
    throw std::invalid_argument("vstep_explicit_state: register sizes do not match");
  if (noises.size() != explicit_state_noise_count(taus_tail, phis))
    throw std::invalid_argument("vstep_explicit_state: wrong number of noise draws");

  Vec x(p.n, 0.0);
  size_t next = 0;
  auto accumulate = [&](const Mat& prefix, int from, int to) {
    // adds prefix * sum_{i=from..to} A^{i-1} w_i
    for (int i = from; i <= to; ++i) {
      Mat coeff = prefix * mat_pow(p.A, i - 1);
      const Vec& w = noises[next++];
      for (int r = 0; r < p.n; ++r) {
        double s = 0.0;
        for (int c = 0; c < p.n; ++c) s += coeff(r, c) * w[c];
        x[r] += s;
      }
    }
  };

  accumulate(identity(p.n), 1, phis[0]);
  int exponent = 0;
  for (size_t j = 1; j < phis.size(); ++j) {
    exponent += phis[j - 1] - taus_tail[j - 1];
    if (exponent < 0)
      throw std::invalid_argument("vstep_explicit_state: inconsistent registers");
    int tau_j = taus_tail[j - 1];
    if (phis[j] < tau_j)
      throw std::invalid_argument("vstep_explicit_state: inconsistent registers");
    if (phis[j] > tau_j) accumulate(mat_pow(p.M, exponent), tau_j + 1, phis[j]);
  }
  return x;
}

}  // namespace wncs
