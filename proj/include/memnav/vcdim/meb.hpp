#pragma once

// Minimum enclosing L2 ball of the rows of a matrix, from the simplex QP
//   maximize  g(p) = sum_i p_i |psi_i|^2 - |C p|^2,  p >= 0, sum p = 1,
// whose optimum is R^2 with center C p.

#include <Eigen/Dense>

namespace memnav::vcdim {

struct BallResult {
  Eigen::VectorXd center;
  double radius = 0.0;     // max distance of any point from center
  double dual_value = 0.0; // g(p*), a lower bound on R^2
  Eigen::VectorXd p_star;
  long iterations = 0;
  int working_set = 0;
};

struct MebOptions {
  double tol = 1e-8;  // stop when radius - sqrt(g) <= tol (1 + radius)
  long max_inner = 2000000;
};

// Frank-Wolfe with away steps and exact line search. The iteration runs on a
// growing working set of points (seeded with the farthest pair) and folds in
// the farthest outside point until every point satisfies the certificate.
BallResult min_enclosing_ball(const Eigen::MatrixXd& points, const MebOptions& opt = {});

}  // namespace memnav::vcdim
