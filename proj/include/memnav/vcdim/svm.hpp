#pragma once

// Soft-margin linear SVM with an unregularized bias, solved in the dual by
// SMO-style pair updates with second-order working-set selection.

#include <vector>

#include <Eigen/Dense>

namespace memnav::vcdim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct SvmOptions {
  double C = 1.0;
  double gap_tol = 1e-6;  // stop when primal - dual < gap_tol * (1 + |primal|)
  long max_iter = 20000000;
  int check_every = 64;  // duality gap evaluation cadence, in pair updates
};

struct SvmModel {
  Vec w;
  double b = 0.0;
  Vec alpha;
  std::vector<int> support_indices;
  double margin = 0.0;  // 1 / |w|
  double training_error = 0.0;
  double C = 1.0;
  double primal = 0.0;
  double dual = 0.0;
  long iterations = 0;
  bool converged = false;

  double duality_gap() const { return primal - dual; }
};

// Rows of X are examples; y holds +1 / -1. Throws DegenerateData when only one
// label occurs.
SvmModel train_svm(const Mat& X, const std::vector<int>& y, const SvmOptions& opt = {});

// Primal objective 0.5 |w|^2 + C sum hinge(y (w.x + b)).
double svm_primal(const Mat& X, const std::vector<int>& y, const Vec& w, double b, double C);
// Bias minimizing the hinge sum for fixed w. The midpoint of the minimizing
// interval is returned when it is not a single point.
double optimal_bias(const Vec& scores, const std::vector<int>& y);

}  // namespace memnav::vcdim
