#include "wncs/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wncs {

namespace {

void check_prob(double p, const std::string& field) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument(field + ": probability must be in (0,1), got " +
                                std::to_string(p));
}

void check_markov_link(const std::vector<double>& loss, const Mat& d,
                       const std::string& loss_field, const std::string& d_field) {
  int n = static_cast<int>(loss.size());
  if (n == 0) throw std::invalid_argument(loss_field + ": must not be empty");
  for (double p : loss)
    if (!(p >= 0.0) || !(p <= 1.0))
      throw std::invalid_argument(loss_field + ": probabilities must be in [0,1]");
  if (d.rows != n || d.cols != n)
    throw std::invalid_argument(d_field + ": must be square with one row per state");
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (d(i, j) < 0.0)
        throw std::invalid_argument(d_field + ": entries must be nonnegative");
      row += d(i, j);
    }
    if (std::abs(row - 1.0) > 1e-9)
      throw std::invalid_argument(d_field + ": row " + std::to_string(i) +
                                  " must sum to 1");
  }
}

int sample_from_row(const Mat& d, int row, Rng& g) {
  double u = g.uniform();
  double acc = 0.0;
  int n = d.cols;
  for (int j = 0; j < n; ++j) {
    acc += d(row, j);
    if (u < acc) return j;
  }
  return n - 1;
}

}  // namespace

void validate(const StaticChannel& ch) {
  check_prob(ch.p_s, "channel.ps");
  check_prob(ch.p_c, "channel.pc");
}

void validate(const MarkovChannel& ch) {
  check_markov_link(ch.omega, ch.D_s, "channel.omega", "channel.Ds");
  check_markov_link(ch.xi, ch.D_c, "channel.xi", "channel.Dc");
}

void validate(const Channel& ch) {
  std::visit([](const auto& c) { validate(c); }, ch);
}

double loss_prob(const Channel& ch, Link l, int state) {
  if (const auto* st = std::get_if<StaticChannel>(&ch))
    return l == Link::Up ? st->p_s : st->p_c;
  const auto& mk = std::get<MarkovChannel>(ch);
  const auto& loss = l == Link::Up ? mk.omega : mk.xi;
  if (state < 0 || state >= static_cast<int>(loss.size()))
    throw std::out_of_range("channel state index out of range");
  return loss[state];
}

bool sample_outcome(const Channel& ch, Link l, int state, Rng& g) {
  return g.uniform() >= loss_prob(ch, l, state);
}

int step_channel_state(const MarkovChannel& ch, Link l, int state, Rng& g) {
  const Mat& d = l == Link::Up ? ch.D_s : ch.D_c;
  if (state < 0 || state >= d.rows)
    throw std::out_of_range("channel state index out of range");
  return sample_from_row(d, state, g);
}

double joint_transition_prob(const MarkovChannel& ch, int hs, int hc, int hs2,
                             int hc2) {
  if (hs < 0 || hs >= ch.D_s.rows || hs2 < 0 || hs2 >= ch.D_s.rows ||
      hc < 0 || hc >= ch.D_c.rows || hc2 < 0 || hc2 >= ch.D_c.rows)
    throw std::out_of_range("channel state index out of range");
  return ch.D_s(hs, hs2) * ch.D_c(hc, hc2);
}

}  // namespace wncs
