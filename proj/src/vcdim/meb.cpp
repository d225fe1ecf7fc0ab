#include "memnav/vcdim/meb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace memnav::vcdim {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Away-step Frank-Wolfe over the simplex of a working set with Gram matrix K.
// Kp = K p is maintained, so one iteration costs O(|S|).
long fw_solve(const Mat& K, Vec& p, double gap_tol, long max_iter) {
  const Eigen::Index m = K.rows();
  const Vec sq = K.diagonal();
  Vec Kp = K * p;
  long it = 0;
  for (; it < max_iter; ++it) {
    if (it % 1024 == 1023) {
      p /= p.sum();
      Kp = K * p;
    }
    const double cc = p.dot(Kp);    // |c|^2
    const double S = p.dot(sq);     // sum p_i |psi_i|^2
    // grad_i = |psi_i|^2 - 2 psi_i.c
    Eigen::Index fw = 0, away = -1;
    double gfw = -std::numeric_limits<double>::infinity();
    double gaway = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double g = sq[i] - 2.0 * Kp[i];
      if (g > gfw) { gfw = g; fw = i; }
      if (p[i] > 0 && g < gaway) { gaway = g; away = i; }
    }
    const double mean_grad = S - 2.0 * cc;
    const double fw_gap = gfw - mean_grad;
    if (fw_gap <= gap_tol) break;
    const double away_gap = mean_grad - gaway;
    Eigen::Index v;
    double dq, dcc, cdc, gmax;
    // Along d the center moves by dc; g(gamma) = g + gamma (dq - 2 c.dc) - gamma^2 |dc|^2.
    if (fw_gap >= away_gap) {
      v = fw;
      dq = sq[v] - S;
      cdc = Kp[v] - cc;
      dcc = sq[v] - 2.0 * Kp[v] + cc;
      gmax = 1.0;
    } else {
      v = away;
      dq = S - sq[v];
      cdc = cc - Kp[v];
      dcc = cc - 2.0 * Kp[v] + sq[v];
      gmax = p[v] < 1.0 ? p[v] / (1.0 - p[v]) : std::numeric_limits<double>::infinity();
    }
    double gamma = dcc > 0 ? (dq - 2.0 * cdc) / (2.0 * dcc) : gmax;
    gamma = std::clamp(gamma, 0.0, gmax);
    if (gamma <= 0) break;
    if (v == fw && fw_gap >= away_gap) {
      p *= (1.0 - gamma);
      p[v] += gamma;
      Kp = (1.0 - gamma) * Kp + gamma * K.col(v);
    } else {
      p *= (1.0 + gamma);
      p[v] -= gamma;
      if (gamma == gmax) p[v] = 0.0;
      Kp = (1.0 + gamma) * Kp - gamma * K.col(v);
    }
  }
  return it;
}

}  // namespace

BallResult min_enclosing_ball(const Mat& X, const MebOptions& opt) {
  const Eigen::Index n = X.rows();
  if (n < 1) throw std::invalid_argument("min_enclosing_ball needs at least one point");
  BallResult res;
  res.p_star = Vec::Zero(n);
  if (n == 1) {
    res.center = X.row(0).transpose();
    res.p_star[0] = 1.0;
    return res;
  }

  std::vector<Eigen::Index> work;
  // Farthest point from x_0, then farthest from that one.
  Eigen::Index a = 0, b = 0;
  (X.rowwise() - X.row(0)).rowwise().squaredNorm().maxCoeff(&a);
  (X.rowwise() - X.row(a)).rowwise().squaredNorm().maxCoeff(&b);
  work.push_back(a);
  if (b != a) work.push_back(b);
  Vec p = Vec::Constant(static_cast<Eigen::Index>(work.size()), 1.0 / static_cast<double>(work.size()));

  while (true) {
    const Eigen::Index m = static_cast<Eigen::Index>(work.size());
    Mat W(m, X.cols());
    for (Eigen::Index i = 0; i < m; ++i) W.row(i) = X.row(work[static_cast<std::size_t>(i)]);
    // Points are centered on the working-set mean for conditioning.
    const Eigen::RowVectorXd mu = W.colwise().mean();
    const Mat Wc = W.rowwise() - mu;
    const Mat K = Wc * Wc.transpose();
    const double scale = std::max(1e-300, K.diagonal().maxCoeff());
    res.iterations += fw_solve(K, p, 1e-15 * scale, opt.max_inner);

    const Vec center = Wc.transpose() * p + mu.transpose();
    const Vec d2 = (X.rowwise() - center.transpose()).rowwise().squaredNorm();
    Eigen::Index far = 0;
    const double r_out = std::sqrt(d2.maxCoeff(&far));
    const Vec sqc = Wc.rowwise().squaredNorm();
    const double g = std::max(0.0, p.dot(sqc) - (Wc.transpose() * p).squaredNorm());
    const double r_in = std::sqrt(g);
    const bool in_set = std::find(work.begin(), work.end(), far) != work.end();
    if (r_out - r_in <= opt.tol * (1.0 + r_out) || in_set) {
      res.center = center;
      res.radius = r_out;
      res.dual_value = g;
      for (Eigen::Index i = 0; i < m; ++i) res.p_star[work[static_cast<std::size_t>(i)]] = p[i];
      res.working_set = static_cast<int>(m);
      return res;
    }
    work.push_back(far);
    p.conservativeResize(m + 1);
    p[m] = 0.0;
  }
}

}  // namespace memnav::vcdim
