#pragma once

#include <variant>
#include <vector>

#include "wncs/matlite.hpp"
#include "wncs/rng.hpp"

namespace wncs {

enum class Link { Up, Down };

// Constant packet-error probabilities on the two links.
struct StaticChannel {
  double p_s = 0.1, p_c = 0.1;
};

// Finite-state Markov fading: per-state loss probabilities and row-stochastic
// transition matrices (row = from-state).
struct MarkovChannel {
  std::vector<double> omega;  // uplink loss per state
  std::vector<double> xi;     // downlink loss per state
  Mat D_s, D_c;

  int states(Link l) const {
    return static_cast<int>(l == Link::Up ? omega.size() : xi.size());
  }
};

using Channel = std::variant<StaticChannel, MarkovChannel>;

// Throw std::invalid_argument naming the offending field.
void validate(const StaticChannel& ch);
void validate(const MarkovChannel& ch);
void validate(const Channel& ch);

double loss_prob(const Channel& ch, Link l, int state);

// true = packet delivered. state is ignored for static channels.
bool sample_outcome(const Channel& ch, Link l, int state, Rng& g);

int step_channel_state(const MarkovChannel& ch, Link l, int state, Rng& g);

double joint_transition_prob(const MarkovChannel& ch, int hs, int hc, int hs2,
                             int hc2);

}  // namespace wncs
