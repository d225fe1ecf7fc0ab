#include "memnav/vcdim/pca.hpp"

#include <sstream>
#include <stdexcept>

#include "memnav/map_io.hpp"

namespace memnav::vcdim {

PcaResult pca_project(const Eigen::MatrixXd& X, int k) {
  if (k < 1 || X.rows() <= k || X.cols() < k) throw std::invalid_argument("pca_project needs N > k and D >= k");
  PcaResult r;
  r.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd Xc = X.rowwise() - r.mean.transpose();
  const Eigen::MatrixXd cov = Xc.transpose() * Xc / static_cast<double>(X.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  // Eigenvalues ascend; the leading directions are the last columns.
  const Eigen::Index d = X.cols();
  r.components.resize(d, k);
  r.explained.resize(k);
  const double total = std::max(0.0, es.eigenvalues().sum());
  for (int j = 0; j < k; ++j) {
    Eigen::VectorXd v = es.eigenvectors().col(d - 1 - j);
    // Sign convention: the largest-magnitude entry is positive.
    Eigen::Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (v[at] < 0) v = -v;
    r.components.col(j) = v;
    r.explained[j] = total > 0 ? std::max(0.0, es.eigenvalues()[d - 1 - j]) / total : 0.0;
  }
  r.coords = Xc * r.components;
  return r;
}

std::string pca_csv(const PcaResult& r, const std::vector<int>& labels) {
  std::ostringstream out;
  out << "pc1,pc2,class\n";
  for (Eigen::Index i = 0; i < r.coords.rows(); ++i)
    out << format_real(r.coords(i, 0)) << ',' << format_real(r.coords.cols() > 1 ? r.coords(i, 1) : 0.0)
        << ',' << labels.at(static_cast<std::size_t>(i)) << '\n';
  return out.str();
}

std::string pca_svg(const PcaResult& r, const std::vector<int>& labels, double radius,
                    const std::string& title) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"};
  static const char* names[] = {"down", "right", "up", "left"};
  const double size = 480, margin = 40;
  const double R = radius > 0 ? radius : 1.0;
  auto px = [&](double v) { return margin + (v + R) / (2 * R) * (size - 2 * margin); };
  auto py = [&](double v) { return size - margin - (v + R) / (2 * R) * (size - 2 * margin); };
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << size / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size - 2 * margin
      << "\" height=\"" << size - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"" << size - 10 << "\" font-size=\"11\">-" << format_real(R)
      << "</text>\n<text x=\"" << size - margin << "\" y=\"" << size - 10
      << "\" text-anchor=\"end\" font-size=\"11\">" << format_real(R) << "</text>\n";
  for (Eigen::Index i = 0; i < r.coords.rows(); ++i) {
    const int c = labels.at(static_cast<std::size_t>(i)) & 3;
    const double y = r.coords.cols() > 1 ? r.coords(i, 1) : 0.0;
    out << "<circle cx=\"" << px(r.coords(i, 0)) << "\" cy=\"" << py(y) << "\" r=\"2\" fill=\""
        << colors[c] << "\" fill-opacity=\"0.6\"/>\n";
  }
  for (int c = 0; c < 4; ++c)
    out << "<text x=\"" << margin + 8 << "\" y=\"" << margin + 16 + 14 * c << "\" font-size=\"11\" fill=\""
        << colors[c] << "\">" << names[c] << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace memnav::vcdim
