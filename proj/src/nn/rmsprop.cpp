#include "memnav/nn/rmsprop.hpp"

#include "memnav/errors.hpp"

namespace memnav::nn {

RmsPropState rmsprop_init(std::size_t n) {
  return {Vec::Zero(static_cast<Eigen::Index>(n)), 0};
}

void rmsprop_update(RmsPropState& state, Vec& theta, const Vec& grad, const RmsPropConfig& cfg) {
  if (theta.size() != grad.size() || state.mean_square.size() != theta.size())
    throw ShapeMismatch("optimizer state, parameters and gradient differ in length");
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    double& s = state.mean_square[i];
    s = cfg.rho * s + (1.0 - cfg.rho) * grad[i] * grad[i];
    theta[i] -= cfg.lr * grad[i] / (std::sqrt(s) + cfg.eps);
  }
  ++state.steps;
}

}  // namespace memnav::nn
