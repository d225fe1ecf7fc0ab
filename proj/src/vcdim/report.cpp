#include "memnav/vcdim/report.hpp"

#include <future>
#include <sstream>

#include "memnav/gridworld.hpp"
#include "memnav/map_io.hpp"

namespace memnav::vcdim {

VcClassRecord estimate_vc(const SvmModel& svm, const BallResult& ball) {
  VcClassRecord r;
  r.radius = ball.radius;
  r.eta_est = ball.radius * ball.radius * svm.w.squaredNorm();
  r.margin = svm.margin;
  r.n_support = static_cast<int>(svm.support_indices.size());
  r.training_error = svm.training_error;
  r.duality_gap = svm.duality_gap();
  r.primal = svm.primal;
  r.converged = svm.converged;
  return r;
}

VcEstimate vc_estimate(const FeatureSet& fs, const std::string& model, double C) {
  VcEstimate est;
  est.model = model;
  est.n = fs.size();
  const BallResult ball = min_enclosing_ball(fs.psi);
  est.radius = ball.radius;
  const auto counts = fs.class_counts();
  std::vector<std::future<VcClassRecord>> jobs;
  for (int c = 0; c < kNumActions; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0 || counts[static_cast<std::size_t>(c)] == fs.size()) continue;
    jobs.push_back(std::async(std::launch::async, [&fs, &ball, c, C] {
      SvmOptions opt;
      opt.C = C;
      const SvmModel svm = train_svm(fs.psi, fs.one_vs_all(c), opt);
      VcClassRecord r = estimate_vc(svm, ball);
      r.cls = c;
      Eigen::MatrixXd rows(std::count(fs.labels.begin(), fs.labels.end(), c), fs.psi.cols());
      Eigen::Index k = 0;
      for (int i = 0; i < fs.size(); ++i)
        if (fs.labels[static_cast<std::size_t>(i)] == c) rows.row(k++) = fs.psi.row(i);
      r.class_radius = min_enclosing_ball(rows).radius;
      r.class_eta = r.class_radius * r.class_radius * svm.w.squaredNorm();
      return r;
    }));
  }
  for (auto& j : jobs) est.classes.push_back(j.get());
  return est;
}

std::string vc_report_csv(const std::vector<VcEstimate>& rows) {
  std::ostringstream out;
  out << "model,class,eta_est,margin,nSV,training_error,radius,class_radius,class_eta,duality_gap\n";
  for (const VcEstimate& e : rows)
    for (const VcClassRecord& r : e.classes)
      out << e.model << ',' << to_string(static_cast<Action>(r.cls)) << ',' << format_real(r.eta_est) << ','
          << format_real(r.margin) << ',' << r.n_support << ',' << format_real(r.training_error) << ','
          << format_real(r.radius) << ',' << format_real(r.class_radius) << ',' << format_real(r.class_eta)
          << ',' << format_real(r.duality_gap) << '\n';
  return out.str();
}

}  // namespace memnav::vcdim
