#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace memnav::vcdim {

struct PcaResult {
  Eigen::MatrixXd coords;      // N x k
  Eigen::MatrixXd components;  // D x k, orthonormal columns, leading first
  Eigen::VectorXd mean;        // D
  Eigen::VectorXd explained;   // k fractions of total variance
};

// Mean-centered projection onto the top-k principal directions.
PcaResult pca_project(const Eigen::MatrixXd& X, int k = 2);

// pc1,pc2,class
std::string pca_csv(const PcaResult& r, const std::vector<int>& labels);
// Scatter of the first two coordinates, one color per class. Both axes span
// [-radius, radius] around the origin of the projection.
std::string pca_svg(const PcaResult& r, const std::vector<int>& labels, double radius,
                    const std::string& title);

}  // namespace memnav::vcdim
