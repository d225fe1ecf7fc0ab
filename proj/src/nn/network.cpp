#include "memnav/nn/network.hpp"

#include <cmath>
#include <stdexcept>

#include "memnav/errors.hpp"

namespace memnav::nn {

namespace {

using CMap = Eigen::Map<const Mat>;
using MMap = Eigen::Map<Mat>;
using CVMap = Eigen::Map<const Vec>;
using VMap = Eigen::Map<Vec>;

CMap mat(const Vec& theta, std::size_t off, int rows, int cols) {
  return CMap(theta.data() + off, rows, cols);
}
MMap mat(Vec& theta, std::size_t off, int rows, int cols) {
  return MMap(theta.data() + off, rows, cols);
}
CVMap vec(const Vec& theta, std::size_t off, int n) { return CVMap(theta.data() + off, n); }
VMap vec(Vec& theta, std::size_t off, int n) { return VMap(theta.data() + off, n); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

ParamBlock weight(std::string name, int rows, int cols, bool memory, int fan_in, int fan_out) {
  ParamBlock b;
  b.name = std::move(name);
  b.rows = rows;
  b.cols = cols;
  b.memory = memory;
  b.init = ParamBlock::Init::Weight;
  b.fan_in = fan_in;
  b.fan_out = fan_out;
  return b;
}

ParamBlock bias(std::string name, int rows, bool memory,
                ParamBlock::Init init = ParamBlock::Init::Zero) {
  ParamBlock b;
  b.name = std::move(name);
  b.rows = rows;
  b.cols = 1;
  b.memory = memory;
  b.init = init;
  return b;
}

Vec flatten(const Mat& m) { return CVMap(m.data(), m.size()); }

}  // namespace

Vec softmax(const Vec& logits) {
  Vec z = logits.array() - logits.maxCoeff();
  z = z.array().exp();
  return z / z.sum();
}

double cross_entropy(const Vec& logits, Action label) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits[static_cast<int>(label)];
}

int argmax(const Vec& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

Network::Network(ArchSpec arch) : arch_(std::move(arch)) {
  arch_.validate();
  int len = arch_.range_dim, ch = 1;
  for (std::size_t i = 0; i < arch_.conv.size(); ++i) {
    const ConvSpec& c = arch_.conv[i];
    ConvIdx idx;
    idx.kernel = c.kernel;
    idx.stride = c.stride;
    idx.in_ch = ch;
    idx.out_ch = c.channels;
    idx.in_len = len;
    idx.out_len = (len - c.kernel) / c.stride + 1;
    const std::string p = "conv" + std::to_string(i);
    idx.w = layout_.add(weight(p + ".w", c.channels, ch * c.kernel, false, ch * c.kernel, c.channels));
    idx.b = layout_.add(bias(p + ".b", c.channels, false));
    conv_.push_back(idx);
    len = idx.out_len;
    ch = c.channels;
  }

  const bool dnc = is_dnc(arch_.kind);
  read_dim_ = dnc ? arch_.memory->cols * arch_.memory->read_heads : 0;
  const int nl = static_cast<int>(arch_.hidden_sizes.size());
  int in = arch_.trunk_input_dim();
  for (int l = 0; l < nl; ++l) {
    DenseIdx d;
    d.in = in;
    d.out = arch_.hidden_sizes[l];
    d.read_in = l == 0 ? read_dim_ : 0;
    d.lstm = has_lstm(arch_.kind) && l == nl - 1;
    const std::string p = (d.lstm ? "lstm" : "fc") + std::to_string(l);
    const int rows = d.lstm ? 4 * d.out : d.out;
    d.w = layout_.add(weight(p + ".w", rows, d.in, d.lstm, d.in, d.out));
    if (d.read_in > 0) d.w_read = layout_.add(weight(p + ".w_read", rows, d.read_in, true, d.in + d.read_in, d.out));
    if (d.lstm) d.u = layout_.add(weight(p + ".u", rows, d.out, true, d.out, d.out));
    d.b = layout_.add(bias(p + ".b", rows, d.lstm,
                           d.lstm ? ParamBlock::Init::LstmBias : ParamBlock::Init::Zero));
    layers_.push_back(d);
    in = d.out;
  }

  const int ctrl = arch_.hidden_sizes.back();
  if (dnc) {
    iface_size_ = interface_size(*arch_.memory);
    iface_w_ = layout_.add(weight("iface.w", iface_size_, ctrl, true, ctrl, iface_size_));
    iface_b_ = layout_.add(bias("iface.b", iface_size_, true));
    fuse_wh_ = layout_.add(weight("fuse.w", arch_.fuse_size, ctrl, false, ctrl + read_dim_, arch_.fuse_size));
    fuse_wr_ = layout_.add(weight("fuse.w_read", arch_.fuse_size, read_dim_, true, ctrl + read_dim_, arch_.fuse_size));
    fuse_b_ = layout_.add(bias("fuse.b", arch_.fuse_size, false));
  }
  const int dim = arch_.feature_dim();
  readout_w_ = layout_.add(weight("readout.w", kNumActions, dim, false, dim, kNumActions));
  readout_b_ = layout_.add(bias("readout.b", kNumActions, false));
  memory_mask_ = layout_.memory_mask();
}

MemoryState Network::initial_state() const {
  MemoryState s;
  s.lstm.resize(layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l)
    if (layers_[l].lstm) s.lstm[l] = {Vec::Zero(layers_[l].out), Vec::Zero(layers_[l].out)};
  if (is_dnc(arch_.kind)) s.dnc = DncState::zeros(*arch_.memory);
  return s;
}

PolicyOutput Network::forward(const Vec& theta, const Vec& input, MemoryState& state,
                              StepTrace* trace) const {
  if (static_cast<std::size_t>(theta.size()) != layout_.size())
    throw ShapeMismatch("parameter vector has the wrong length");
  if (input.size() != arch_.input_dim) throw ShapeMismatch("input has the wrong length");
  if (state.lstm.size() != layers_.size() || state.dnc.has_value() != is_dnc(arch_.kind))
    throw ShapeMismatch("memory state does not match the architecture");
  if (trace) {
    *trace = StepTrace{};
    trace->input = input;
  }

  Vec x;
  if (conv_.empty()) {
    x = input;
  } else {
    Mat a = input.head(arch_.range_dim).transpose();  // 1 x range_dim
    for (const ConvIdx& c : conv_) {
      const auto w = mat(theta, c.w, c.out_ch, c.in_ch * c.kernel);
      const auto b = vec(theta, c.b, c.out_ch);
      Mat out(c.out_ch, c.out_len);
      for (int p = 0; p < c.out_len; ++p) {
        CVMap patch(a.data() + static_cast<std::ptrdiff_t>(p) * c.stride * c.in_ch, c.in_ch * c.kernel);
        out.col(p) = (w * patch + b).array().tanh();
      }
      if (trace) trace->conv.push_back({a, out});
      a = std::move(out);
    }
    const int tail = arch_.input_dim - arch_.range_dim;
    x.resize(a.size() + tail);
    x.head(a.size()) = flatten(a);
    x.tail(tail) = input.tail(tail);
  }

  Vec reads;
  if (state.dnc) reads = flatten(state.dnc->read_vectors);

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseIdx& d = layers_[l];
    const int rows = d.lstm ? 4 * d.out : d.out;
    Vec z = mat(theta, d.w, rows, d.in) * x + vec(theta, d.b, rows);
    if (d.read_in > 0) z.noalias() += mat(theta, d.w_read, rows, d.read_in) * reads;
    LayerTrace* lt = nullptr;
    if (trace) {
      lt = &trace->layers.emplace_back();
      lt->input = x;
    }
    if (d.lstm) {
      LstmState& st = state.lstm[l];
      z.noalias() += mat(theta, d.u, rows, d.out) * st.h;
      const int n = d.out;
      Vec gates(rows);
      for (int k = 0; k < n; ++k) {
        gates[k] = sigmoid(z[k]);
        gates[n + k] = sigmoid(z[n + k]);
        gates[2 * n + k] = std::tanh(z[2 * n + k]);
        gates[3 * n + k] = sigmoid(z[3 * n + k]);
      }
      Vec c = gates.segment(n, n).cwiseProduct(st.c) +
              gates.head(n).cwiseProduct(gates.segment(2 * n, n));
      Vec tc = c.array().tanh();
      Vec h = gates.tail(n).cwiseProduct(tc);
      if (lt) {
        lt->h_prev = st.h;
        lt->c_prev = st.c;
        lt->gates = gates;
        lt->c = c;
        lt->tanh_c = tc;
        lt->out = h;
      }
      st.h = h;
      st.c = std::move(c);
      x = std::move(h);
    } else {
      x = z.array().tanh();
      if (lt) lt->out = x;
    }
  }

  PolicyOutput out;
  if (state.dnc) {
    const Vec xi = mat(theta, iface_w_, iface_size_, static_cast<int>(x.size())) * x +
                   vec(theta, iface_b_, iface_size_);
    DncState next;
    MemoryStepTrace* mt = trace ? &trace->memory.emplace() : nullptr;
    memory_step(*arch_.memory, xi, *state.dnc, next, mt);
    *state.dnc = std::move(next);
    const Vec fresh = flatten(state.dnc->read_vectors);
    const int ctrl = static_cast<int>(x.size());
    Vec pre = mat(theta, fuse_wh_, arch_.fuse_size, ctrl) * x +
              mat(theta, fuse_wr_, arch_.fuse_size, read_dim_) * fresh + vec(theta, fuse_b_, arch_.fuse_size);
    if (trace) {
      trace->fuse_input.resize(ctrl + read_dim_);
      trace->fuse_input << x, fresh;
    }
    out.psi = pre.array().tanh();
  } else {
    out.psi = std::move(x);
  }
  const int dim = arch_.feature_dim();
  out.logits = mat(theta, readout_w_, kNumActions, dim) * out.psi + vec(theta, readout_b_, kNumActions);
  out.probs = softmax(out.logits);
  out.chosen = static_cast<Action>(argmax(out.logits));
  if (trace) {
    trace->psi = out.psi;
    trace->logits = out.logits;
    trace->probs = out.probs;
  }
  return out;
}

double Network::loss(const std::vector<PolicyOutput>& outputs, const std::vector<Action>& labels,
                     const Vec& theta) const {
  if (outputs.size() != labels.size()) throw ShapeMismatch("outputs and labels differ in length");
  double ce = 0.0;
  for (std::size_t t = 0; t < outputs.size(); ++t) ce += cross_entropy(outputs[t].logits, labels[t]);
  if (!outputs.empty()) ce /= static_cast<double>(outputs.size());
  if (arch_.mem_l2 > 0) ce += 0.5 * arch_.mem_l2 * theta.cwiseProduct(memory_mask_).squaredNorm();
  return ce;
}

double Network::loss_from_traces(const std::vector<StepTrace>& window,
                                 const std::vector<Action>& labels, const Vec& theta) const {
  if (window.size() != labels.size()) throw ShapeMismatch("window and labels differ in length");
  double ce = 0.0;
  for (std::size_t t = 0; t < window.size(); ++t) ce += cross_entropy(window[t].logits, labels[t]);
  if (!window.empty()) ce /= static_cast<double>(window.size());
  if (arch_.mem_l2 > 0) ce += 0.5 * arch_.mem_l2 * theta.cwiseProduct(memory_mask_).squaredNorm();
  return ce;
}

double Network::replay_loss(const Vec& theta, const std::vector<StepTrace>& window,
                            const std::vector<Action>& labels) const {
  if (window.size() != labels.size()) throw ShapeMismatch("window and labels differ in length");
  MemoryState state = initial_state();
  if (!window.empty())
    for (std::size_t l = 0; l < layers_.size(); ++l)
      if (layers_[l].lstm) state.lstm[l] = {window[0].layers[l].h_prev, window[0].layers[l].c_prev};
  std::vector<PolicyOutput> outs;
  for (const StepTrace& tr : window) {
    if (state.dnc) *state.dnc = tr.memory->prev;
    outs.push_back(forward(theta, tr.input, state));
  }
  return loss(outs, labels, theta);
}

Vec Network::backward(const Vec& theta, const std::vector<StepTrace>& window,
                      const std::vector<Action>& labels) const {
  if (window.size() != labels.size()) throw ShapeMismatch("window and labels differ in length");
  if (window.size() > static_cast<std::size_t>(kBpttWindow))
    throw std::invalid_argument("window exceeds the BPTT truncation length");
  Vec grad = Vec::Zero(theta.size());
  const int T = static_cast<int>(window.size());
  const int dim = arch_.feature_dim();
  const std::size_t nl = layers_.size();
  std::vector<Vec> carry_h(nl), carry_c(nl);
  for (std::size_t l = 0; l < nl; ++l)
    if (layers_[l].lstm) {
      carry_h[l] = Vec::Zero(layers_[l].out);
      carry_c[l] = Vec::Zero(layers_[l].out);
    }

  for (int t = T - 1; t >= 0; --t) {
    const StepTrace& tr = window[static_cast<std::size_t>(t)];
    Vec dlogits = tr.probs;
    dlogits[static_cast<int>(labels[static_cast<std::size_t>(t)])] -= 1.0;
    dlogits /= static_cast<double>(T);
    mat(grad, readout_w_, kNumActions, dim).noalias() += dlogits * tr.psi.transpose();
    vec(grad, readout_b_, kNumActions) += dlogits;
    Vec dpsi = mat(theta, readout_w_, kNumActions, dim).transpose() * dlogits;

    Vec dh;
    if (tr.memory) {
      const int ctrl = arch_.hidden_sizes.back();
      const Vec dpre = dpsi.cwiseProduct((1.0 - tr.psi.array().square()).matrix());
      const Vec h = tr.fuse_input.head(ctrl);
      const Vec r = tr.fuse_input.tail(read_dim_);
      mat(grad, fuse_wh_, arch_.fuse_size, ctrl).noalias() += dpre * h.transpose();
      mat(grad, fuse_wr_, arch_.fuse_size, read_dim_).noalias() += dpre * r.transpose();
      vec(grad, fuse_b_, arch_.fuse_size) += dpre;
      dh = mat(theta, fuse_wh_, arch_.fuse_size, ctrl).transpose() * dpre;
      const Vec dr = mat(theta, fuse_wr_, arch_.fuse_size, read_dim_).transpose() * dpre;
      const Mat dr_mat = CMap(dr.data(), arch_.memory->cols, arch_.memory->read_heads);
      const Vec dxi = memory_step_backward(*arch_.memory, *tr.memory, dr_mat);
      mat(grad, iface_w_, iface_size_, ctrl).noalias() += dxi * h.transpose();
      vec(grad, iface_b_, iface_size_) += dxi;
      dh.noalias() += mat(theta, iface_w_, iface_size_, ctrl).transpose() * dxi;
    } else {
      dh = std::move(dpsi);
    }

    Vec reads;
    if (tr.memory) reads = flatten(tr.memory->prev.read_vectors);
    Vec da = std::move(dh);
    for (int l = static_cast<int>(nl) - 1; l >= 0; --l) {
      const DenseIdx& d = layers_[static_cast<std::size_t>(l)];
      const LayerTrace& lt = tr.layers[static_cast<std::size_t>(l)];
      const int rows = d.lstm ? 4 * d.out : d.out;
      Vec dz(rows);
      if (d.lstm) {
        const int n = d.out;
        const Vec dh_tot = da + carry_h[l];
        const auto i = lt.gates.head(n).array();
        const auto f = lt.gates.segment(n, n).array();
        const auto g = lt.gates.segment(2 * n, n).array();
        const auto o = lt.gates.tail(n).array();
        const Vec dc = carry_c[l].array() + dh_tot.array() * o * (1.0 - lt.tanh_c.array().square());
        dz.head(n) = dc.array() * g * i * (1.0 - i);
        dz.segment(n, n) = dc.array() * lt.c_prev.array() * f * (1.0 - f);
        dz.segment(2 * n, n) = dc.array() * i * (1.0 - g * g);
        dz.tail(n) = dh_tot.array() * lt.tanh_c.array() * o * (1.0 - o);
        mat(grad, d.u, rows, n).noalias() += dz * lt.h_prev.transpose();
        carry_h[l] = mat(theta, d.u, rows, n).transpose() * dz;
        carry_c[l] = dc.cwiseProduct(lt.gates.segment(n, n));
      } else {
        dz = da.cwiseProduct((1.0 - lt.out.array().square()).matrix());
      }
      mat(grad, d.w, rows, d.in).noalias() += dz * lt.input.transpose();
      vec(grad, d.b, rows) += dz;
      if (d.read_in > 0) mat(grad, d.w_read, rows, d.read_in).noalias() += dz * reads.transpose();
      if (l > 0 || !conv_.empty()) da = mat(theta, d.w, rows, d.in).transpose() * dz;
    }

    if (!conv_.empty()) {
      const ConvIdx& last = conv_.back();
      Mat dout = CMap(da.data(), last.out_ch, last.out_len);
      for (int ci = static_cast<int>(conv_.size()) - 1; ci >= 0; --ci) {
        const ConvIdx& c = conv_[static_cast<std::size_t>(ci)];
        const ConvTrace& ct = tr.conv[static_cast<std::size_t>(ci)];
        const Mat dpre = dout.cwiseProduct((1.0 - ct.output.array().square()).matrix());
        auto gw = mat(grad, c.w, c.out_ch, c.in_ch * c.kernel);
        auto gb = vec(grad, c.b, c.out_ch);
        const auto w = mat(theta, c.w, c.out_ch, c.in_ch * c.kernel);
        Mat din = Mat::Zero(c.in_ch, c.in_len);
        for (int p = 0; p < c.out_len; ++p) {
          const std::ptrdiff_t at = static_cast<std::ptrdiff_t>(p) * c.stride * c.in_ch;
          CVMap patch(ct.input.data() + at, c.in_ch * c.kernel);
          gw.noalias() += dpre.col(p) * patch.transpose();
          gb += dpre.col(p);
          if (ci > 0) VMap(din.data() + at, c.in_ch * c.kernel) += w.transpose() * dpre.col(p);
        }
        dout = std::move(din);
      }
    }
  }
  if (arch_.mem_l2 > 0) grad += arch_.mem_l2 * theta.cwiseProduct(memory_mask_);
  return grad;
}

}  // namespace memnav::nn
