#pragma once

#include "memnav/nn/arch.hpp"

namespace memnav::nn {

struct RmsPropConfig {
  double lr = 1e-4;
  double rho = 0.9;
  double eps = 1e-8;
  bool operator==(const RmsPropConfig&) const = default;
};

// Per-coordinate running mean of squared gradients; starts at zero.
struct RmsPropState {
  Vec mean_square;
  long steps = 0;
  bool operator==(const RmsPropState& o) const {
    return steps == o.steps && mean_square.size() == o.mean_square.size() &&
           mean_square == o.mean_square;
  }
};

RmsPropState rmsprop_init(std::size_t n);

// s <- rho s + (1 - rho) g^2;  theta <- theta - lr g / (sqrt(s) + eps).
void rmsprop_update(RmsPropState& state, Vec& theta, const Vec& grad, const RmsPropConfig& cfg);

}  // namespace memnav::nn
