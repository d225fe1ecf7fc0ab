#include "memnav/nn/dnc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace memnav::nn {

namespace {

constexpr double kNormEps = 1e-6;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }

double oneplus(double x) { return 1.0 + softplus(x); }

struct Offsets {
  int read_keys, read_strengths, write_key, write_strength, erase, write_vector, free_gates,
      alloc_gate, write_gate, read_modes, total;
};

Offsets offsets(const MemorySpec& s) {
  Offsets o{};
  const int w = s.cols, r = s.read_heads;
  int at = 0;
  o.read_keys = at;
  at += w * r;
  o.read_strengths = at;
  at += r;
  o.write_key = at;
  at += w;
  o.write_strength = at;
  at += 1;
  o.erase = at;
  at += w;
  o.write_vector = at;
  at += w;
  o.free_gates = at;
  at += r;
  o.alloc_gate = at;
  at += 1;
  o.write_gate = at;
  at += 1;
  o.read_modes = at;
  at += 3 * r;
  o.total = at;
  return o;
}

// Backward of content_weights; accumulates into d_key and (optionally) d_memory.
double content_backward(const Mat& memory, const Vec& key, double strength, const ContentTrace& t,
                        const Vec& d_weights, Vec& d_key, Mat* d_memory) {
  const Vec& w = t.weights;
  const Vec dz = w.cwiseProduct(d_weights.array().matrix() - Vec::Constant(w.size(), w.dot(d_weights)));
  const double d_strength = dz.dot(t.sims);
  const Vec ds = strength * dz;
  const double nk = t.key_norm;
  for (Eigen::Index j = 0; j < memory.rows(); ++j) {
    if (ds[j] == 0.0) continue;
    const double nm = t.row_norms[j];
    const double inv = 1.0 / (nm * nk);
    d_key += ds[j] * (memory.row(j).transpose() * inv - (t.dots[j] * inv / (nk * nk)) * key);
    if (d_memory)
      d_memory->row(j) += ds[j] * (key.transpose() * inv - (t.dots[j] * inv / (nm * nm)) * memory.row(j));
  }
  return d_strength;
}

}  // namespace

DncState DncState::zeros(const MemorySpec& s) {
  DncState st;
  st.memory = Mat::Zero(s.rows, s.cols);
  st.read_weights = Mat::Zero(s.rows, s.read_heads);
  st.write_weights = Vec::Zero(s.rows);
  st.usage = Vec::Zero(s.rows);
  st.precedence = Vec::Zero(s.rows);
  st.link = Mat::Zero(s.rows, s.rows);
  st.read_vectors = Mat::Zero(s.cols, s.read_heads);
  return st;
}

bool DncState::operator==(const DncState& o) const {
  return memory == o.memory && read_weights == o.read_weights && write_weights == o.write_weights &&
         usage == o.usage && precedence == o.precedence && link == o.link &&
         read_vectors == o.read_vectors;
}

int interface_size(const MemorySpec& spec) { return offsets(spec).total; }

Interface parse_interface(const MemorySpec& spec, const Vec& raw) {
  const Offsets o = offsets(spec);
  const int w = spec.cols, r = spec.read_heads;
  Interface it;
  it.read_keys = Eigen::Map<const Mat>(raw.data() + o.read_keys, w, r);
  it.read_strengths.resize(r);
  it.free_gates.resize(r);
  for (int i = 0; i < r; ++i) {
    it.read_strengths[i] = oneplus(raw[o.read_strengths + i]);
    it.free_gates[i] = sigmoid(raw[o.free_gates + i]);
  }
  it.write_key = raw.segment(o.write_key, w);
  it.write_strength = oneplus(raw[o.write_strength]);
  it.erase = raw.segment(o.erase, w).unaryExpr([](double x) { return sigmoid(x); });
  it.write_vector = raw.segment(o.write_vector, w);
  it.alloc_gate = sigmoid(raw[o.alloc_gate]);
  it.write_gate = sigmoid(raw[o.write_gate]);
  it.read_modes.resize(3, r);
  for (int i = 0; i < r; ++i) {
    Eigen::Vector3d z = raw.segment<3>(o.read_modes + 3 * i);
    z.array() -= z.maxCoeff();
    z = z.array().exp();
    it.read_modes.col(i) = z / z.sum();
  }
  return it;
}

Vec content_weights(const Mat& memory, const Vec& key, double strength, ContentTrace* trace) {
  const Eigen::Index n = memory.rows();
  Vec dots = memory * key;
  Vec row_norms = (memory.rowwise().squaredNorm().array() + kNormEps).sqrt();
  const double key_norm = std::sqrt(key.squaredNorm() + kNormEps);
  Vec sims(n);
  for (Eigen::Index j = 0; j < n; ++j) sims[j] = dots[j] / (row_norms[j] * key_norm);
  Vec z = strength * sims;
  z.array() -= z.maxCoeff();
  Vec w = z.array().exp();
  w /= w.sum();
  if (trace) {
    trace->sims = std::move(sims);
    trace->weights = w;
    trace->dots = std::move(dots);
    trace->row_norms = std::move(row_norms);
    trace->key_norm = key_norm;
  }
  return w;
}

void memory_step(const MemorySpec& spec, const Vec& raw, const DncState& prev, DncState& next,
                 MemoryStepTrace* trace) {
  const int n = spec.rows, r = spec.read_heads;
  const Interface it = parse_interface(spec, raw);

  // Usage with free gates releasing the locations read last step.
  Vec usage_pre = prev.usage + prev.write_weights - prev.usage.cwiseProduct(prev.write_weights);
  Vec retention = Vec::Ones(n);
  for (int i = 0; i < r; ++i)
    retention.array() *= 1.0 - it.free_gates[i] * prev.read_weights.col(i).array();
  Vec usage = usage_pre.cwiseProduct(retention);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return usage[a] < usage[b]; });
  Vec alloc(n);
  double prod = 1.0;
  for (int j : order) {
    alloc[j] = (1.0 - usage[j]) * prod;
    prod *= usage[j];
  }

  ContentTrace wc;
  Vec write_content = content_weights(prev.memory, it.write_key, it.write_strength, &wc);
  Vec ww = it.write_gate * (it.alloc_gate * alloc + (1.0 - it.alloc_gate) * write_content);

  next.memory = prev.memory.cwiseProduct(Mat::Ones(n, spec.cols) - ww * it.erase.transpose()) +
                ww * it.write_vector.transpose();
  next.usage = usage;
  next.write_weights = ww;

  Mat fwd, bwd;
  if (spec.temporal_links) {
    next.link = prev.link;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        next.link(i, j) = (1.0 - ww[i] - ww[j]) * prev.link(i, j) + ww[i] * prev.precedence[j];
    next.link.diagonal().setZero();
    next.precedence = (1.0 - ww.sum()) * prev.precedence + ww;
    fwd = next.link * prev.read_weights;
    bwd = next.link.transpose() * prev.read_weights;
  } else {
    next.link = prev.link;
    next.precedence = prev.precedence;
  }

  std::vector<ContentTrace> rc(static_cast<std::size_t>(r));
  next.read_weights.resize(n, r);
  for (int i = 0; i < r; ++i) {
    Vec c = content_weights(next.memory, it.read_keys.col(i), it.read_strengths[i], &rc[i]);
    if (spec.temporal_links) {
      next.read_weights.col(i) = it.read_modes(0, i) * bwd.col(i) + it.read_modes(1, i) * c +
                                 it.read_modes(2, i) * fwd.col(i);
    } else {
      next.read_weights.col(i) = c;
    }
  }
  next.read_vectors = next.memory.transpose() * next.read_weights;

  if (trace) {
    trace->raw = raw;
    trace->iface = it;
    trace->prev = prev;
    trace->next = next;
    trace->usage_pre = std::move(usage_pre);
    trace->retention = std::move(retention);
    trace->order = std::move(order);
    trace->alloc = std::move(alloc);
    trace->write_content = std::move(wc);
    trace->read_content = std::move(rc);
    trace->forward_w = std::move(fwd);
    trace->backward_w = std::move(bwd);
  }
}

Vec memory_step_backward(const MemorySpec& spec, const MemoryStepTrace& t, const Mat& d_reads) {
  const int n = spec.rows, w = spec.cols, r = spec.read_heads;
  const Offsets o = offsets(spec);
  const Interface& it = t.iface;
  const DncState& prev = t.prev;
  const DncState& next = t.next;

  Vec d_raw = Vec::Zero(o.total);
  Mat d_mem = next.read_weights * d_reads.transpose();  // n x w
  const Mat d_rw = next.memory * d_reads;                // n x r
  Mat d_link = Mat::Zero(n, n);

  for (int i = 0; i < r; ++i) {
    Vec d_content = d_rw.col(i);
    if (spec.temporal_links) {
      Eigen::Vector3d d_mode(t.backward_w.col(i).dot(d_rw.col(i)),
                             t.read_content[i].weights.dot(d_rw.col(i)),
                             t.forward_w.col(i).dot(d_rw.col(i)));
      const Eigen::Vector3d pi = it.read_modes.col(i);
      const Eigen::Vector3d dz = pi.cwiseProduct(d_mode - Eigen::Vector3d::Constant(pi.dot(d_mode)));
      d_raw.segment<3>(o.read_modes + 3 * i) = dz;
      d_content *= pi[1];
      // fwd = L w_prev, bwd = L^T w_prev
      d_link.noalias() += (pi[2] * d_rw.col(i)) * prev.read_weights.col(i).transpose();
      d_link.noalias() += prev.read_weights.col(i) * (pi[0] * d_rw.col(i)).transpose();
    }
    Vec d_key = Vec::Zero(w);
    const double d_strength = content_backward(next.memory, it.read_keys.col(i),
                                               it.read_strengths[i], t.read_content[i], d_content,
                                               d_key, &d_mem);
    d_raw.segment(o.read_keys + w * i, w) = d_key;
    d_raw[o.read_strengths + i] = d_strength * sigmoid(t.raw[o.read_strengths + i]);
  }

  const Vec& ww = next.write_weights;
  Vec d_ww = Vec::Zero(n);
  if (spec.temporal_links) {
    d_link.diagonal().setZero();
    // L[i,j] = (1 - ww_i - ww_j) L0[i,j] + ww_i p0_j
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += d_link(i, j) * (prev.precedence[j] - prev.link(i, j));
      d_ww[i] += acc;
    }
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += d_link(i, j) * prev.link(i, j);
      d_ww[j] -= acc;
    }
  }

  // M = M0 .* (1 - ww e^T) + ww v^T
  d_ww += (d_mem.array() * (Mat(Vec::Ones(n) * it.write_vector.transpose()) -
                            prev.memory.cwiseProduct(Vec::Ones(n) * it.erase.transpose())).array())
              .matrix()
              .rowwise()
              .sum();
  const Vec d_erase = -(d_mem.cwiseProduct(prev.memory)).transpose() * ww;
  const Vec d_wvec = d_mem.transpose() * ww;
  for (int k = 0; k < w; ++k) {
    const double e = it.erase[k];
    d_raw[o.erase + k] = d_erase[k] * e * (1.0 - e);
  }
  d_raw.segment(o.write_vector, w) = d_wvec;

  // ww = g_w (g_a a + (1 - g_a) c_w)
  const Vec& alloc = t.alloc;
  const Vec& cw = t.write_content.weights;
  const double gw = it.write_gate, ga = it.alloc_gate;
  const double d_gw = d_ww.dot(ga * alloc + (1.0 - ga) * cw);
  const double d_ga = gw * d_ww.dot(alloc - cw);
  d_raw[o.write_gate] = d_gw * gw * (1.0 - gw);
  d_raw[o.alloc_gate] = d_ga * ga * (1.0 - ga);
  const Vec d_alloc = gw * ga * d_ww;
  const Vec d_cw = gw * (1.0 - ga) * d_ww;

  Vec d_wkey = Vec::Zero(w);
  const double d_wstr =
      content_backward(prev.memory, it.write_key, it.write_strength, t.write_content, d_cw, d_wkey, nullptr);
  d_raw.segment(o.write_key, w) = d_wkey;
  d_raw[o.write_strength] = d_wstr * sigmoid(t.raw[o.write_strength]);

  // Allocation through the (fixed) usage sort order.
  const Vec& usage = next.usage;
  Vec d_usage = Vec::Zero(n);
  {
    std::vector<double> prefix(static_cast<std::size_t>(n));
    double prod = 1.0;
    for (int j = 0; j < n; ++j) {
      prefix[j] = prod;
      prod *= usage[t.order[j]];
    }
    double tail = 0.0;  // S_j
    for (int j = n - 1; j >= 0; --j) {
      const int idx = t.order[j];
      d_usage[idx] = prefix[j] * (tail - d_alloc[idx]);
      tail = d_alloc[idx] * (1.0 - usage[idx]) + usage[idx] * tail;
    }
  }

  // usage = usage_pre .* prod_i (1 - f_i w_prev_i)
  const Vec d_ret = d_usage.cwiseProduct(t.usage_pre);
  for (int i = 0; i < r; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      double others = 1.0;
      for (int k = 0; k < r; ++k)
        if (k != i) others *= 1.0 - it.free_gates[k] * prev.read_weights(j, k);
      acc += d_ret[j] * (-prev.read_weights(j, i)) * others;
    }
    const double f = it.free_gates[i];
    d_raw[o.free_gates + i] = acc * f * (1.0 - f);
  }
  return d_raw;
}

}  // namespace memnav::nn
