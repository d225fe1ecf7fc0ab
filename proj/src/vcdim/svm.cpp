#include "memnav/vcdim/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memnav/errors.hpp"

namespace memnav::vcdim {

double svm_primal(const Mat& X, const std::vector<int>& y, const Vec& w, double b, double C) {
  const Vec s = X * w;
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) hinge += std::max(0.0, 1.0 - y[i] * (s[i] + b));
  return 0.5 * w.squaredNorm() + C * hinge;
}

double optimal_bias(const Vec& scores, const std::vector<int>& y) {
  // Slope of the hinge sum in b starts at -(#positives) and rises by one at
  // every breakpoint; the minimum sits between breakpoints P and P+1.
  std::vector<double> bp;
  bp.reserve(y.size());
  long pos = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 0) {
      bp.push_back(1.0 - scores[static_cast<Eigen::Index>(i)]);
      ++pos;
    } else {
      bp.push_back(-1.0 - scores[static_cast<Eigen::Index>(i)]);
    }
  }
  std::sort(bp.begin(), bp.end());
  if (pos == 0) return bp.front();
  if (pos == static_cast<long>(bp.size())) return bp.back();
  return 0.5 * (bp[static_cast<std::size_t>(pos - 1)] + bp[static_cast<std::size_t>(pos)]);
}

SvmModel train_svm(const Mat& X, const std::vector<int>& y, const SvmOptions& opt) {
  const Eigen::Index n = X.rows();
  if (static_cast<std::size_t>(n) != y.size()) throw ShapeMismatch("X rows and labels differ");
  if (!(opt.C > 0)) throw std::invalid_argument("C must be positive");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) has_pos = true;
    else if (v == -1) has_neg = true;
    else throw std::invalid_argument("labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw DegenerateData("one-vs-all split has a single label");

  const double C = opt.C;
  Vec yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv[i] = y[static_cast<std::size_t>(i)];
  const Vec diag = X.rowwise().squaredNorm();
  Vec alpha = Vec::Zero(n);
  Vec w = Vec::Zero(X.cols());
  // G = Q alpha - 1 with Q_ij = y_i y_j x_i.x_j.
  Vec G = Vec::Constant(n, -1.0);
  const double tau = 1e-12;

  auto in_up = [&](Eigen::Index t) {
    return (yv[t] > 0 && alpha[t] < C) || (yv[t] < 0 && alpha[t] > 0);
  };
  auto in_low = [&](Eigen::Index t) {
    return (yv[t] > 0 && alpha[t] > 0) || (yv[t] < 0 && alpha[t] < C);
  };

  SvmModel m;
  m.C = C;
  auto evaluate = [&] {
    const Vec s = X * w;
    const double b = optimal_bias(s, y);
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) hinge += std::max(0.0, 1.0 - yv[i] * (s[i] + b));
    m.primal = 0.5 * w.squaredNorm() + C * hinge;
    m.dual = alpha.sum() - 0.5 * w.squaredNorm();
    m.b = b;
    return m.primal - m.dual < opt.gap_tol * (1.0 + std::abs(m.primal));
  };

  long it = 0;
  for (; it < opt.max_iter; ++it) {
    if (it % opt.check_every == 0 && evaluate()) {
      m.converged = true;
      break;
    }
    Eigen::Index i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t)
      if (in_up(t) && -yv[t] * G[t] > gmax) {
        gmax = -yv[t] * G[t];
        i = t;
      }
    if (i < 0) break;
    const Vec Ki = X * X.row(i).transpose();
    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -yv[t] * G[t];
      gmin = std::min(gmin, v);
      const double bdiff = gmax - v;
      if (bdiff > 0) {
        double a = diag[i] + diag[t] - 2.0 * Ki[t];
        if (a <= 0) a = tau;
        const double score = -bdiff * bdiff / a;
        if (score < best) {
          best = score;
          j = t;
        }
      }
    }
    if (j < 0 || gmax - gmin < 1e-15) {
      m.converged = evaluate();
      break;
    }
    // Two-variable subproblem along y_i da_i = -y_j da_j.
    double a = diag[i] + diag[j] - 2.0 * Ki[j];
    if (a <= 0) a = tau;
    const double ai_old = alpha[i], aj_old = alpha[j];
    if (yv[i] != yv[j]) {
      const double delta = (-G[i] - G[j]) / a;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      const double delta = (G[i] - G[j]) / a;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > C) {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double di = (alpha[i] - ai_old) * yv[i];
    const double dj = (alpha[j] - aj_old) * yv[j];
    const Vec dw = di * X.row(i).transpose() + dj * X.row(j).transpose();
    w += dw;
    G.array() += (yv.array() * (X * dw).array());
  }
  m.iterations = it;
  if (!m.converged) m.converged = evaluate();

  m.w = w;
  m.alpha = alpha;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha[t] > 1e-12 * C) m.support_indices.push_back(static_cast<int>(t));
  const double wn = w.norm();
  m.margin = wn > 0 ? 1.0 / wn : std::numeric_limits<double>::infinity();
  const Vec s = X * w;
  long wrong = 0;
  for (Eigen::Index t = 0; t < n; ++t)
    if (yv[t] * (s[t] + m.b) <= 0) ++wrong;
  m.training_error = static_cast<double>(wrong) / static_cast<double>(n);
  return m;
}

}  // namespace memnav::vcdim
