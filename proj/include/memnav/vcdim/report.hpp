#pragma once

// eta_est = R^2 |w|^2 per one-vs-all class, with margin, support count,
// training error and radius alongside.

#include <string>
#include <vector>

#include "memnav/vcdim/features.hpp"
#include "memnav/vcdim/meb.hpp"
#include "memnav/vcdim/svm.hpp"

namespace memnav::vcdim {

struct VcClassRecord {
  int cls = 0;
  double eta_est = 0.0;  // radius^2 |w|^2 with the all-features radius
  double margin = 0.0;
  double radius = 0.0;
  int n_support = 0;
  double training_error = 0.0;
  double class_radius = 0.0;  // ball over this class's rows only
  double class_eta = 0.0;     // class_radius^2 |w|^2
  double duality_gap = 0.0;
  double primal = 0.0;
  bool converged = false;
};

struct VcEstimate {
  std::string model;
  double radius = 0.0;
  int n = 0;
  std::vector<VcClassRecord> classes;
};

VcClassRecord estimate_vc(const SvmModel& svm, const BallResult& ball);

// Classes absent or covering every row are skipped.
VcEstimate vc_estimate(const FeatureSet& fs, const std::string& model, double C = 1.0);

// model,class,eta_est,margin,nSV,training_error,radius,class_radius,class_eta,duality_gap
std::string vc_report_csv(const std::vector<VcEstimate>& rows);

}  // namespace memnav::vcdim
