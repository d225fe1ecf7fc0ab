#include "memnav/nn/arch.hpp"

#include <cmath>
#include <stdexcept>

#include "memnav/errors.hpp"

namespace memnav::nn {

const char* to_string(ArchKind k) {
  switch (k) {
    case ArchKind::FF: return "ff";
    case ArchKind::LSTM: return "lstm";
    case ArchKind::DncFF: return "dnc-ff";
    case ArchKind::DncLSTM: return "dnc-lstm";
  }
  return "?";
}

ArchKind parse_arch_kind(const std::string& s) {
  if (s == "ff") return ArchKind::FF;
  if (s == "lstm") return ArchKind::LSTM;
  if (s == "dnc-ff") return ArchKind::DncFF;
  if (s == "dnc-lstm") return ArchKind::DncLSTM;
  throw std::invalid_argument("unknown architecture '" + s + "'");
}

int ArchSpec::trunk_input_dim() const {
  if (conv.empty()) return input_dim;
  int len = range_dim;
  int channels = 1;
  for (const ConvSpec& c : conv) {
    len = (len - c.kernel) / c.stride + 1;
    channels = c.channels;
  }
  return len * channels + (input_dim - range_dim);
}

int ArchSpec::feature_dim() const {
  if (is_dnc(kind)) return fuse_size;
  return hidden_sizes.empty() ? 0 : hidden_sizes.back();
}

void ArchSpec::validate() const {
  if (hidden_sizes.empty()) throw std::invalid_argument("architecture needs at least one layer");
  for (int h : hidden_sizes)
    if (h < 1) throw std::invalid_argument("layer widths must be positive");
  if (input_dim < 1) throw std::invalid_argument("input_dim must be positive");
  if (range_dim < 0 || range_dim > input_dim)
    throw std::invalid_argument("range_dim must lie in [0, input_dim]");
  int len = range_dim;
  for (const ConvSpec& c : conv) {
    if (c.kernel < 1 || c.stride < 1 || c.channels < 1)
      throw std::invalid_argument("conv kernel, stride and channels must be positive");
    if (len < c.kernel) throw std::invalid_argument("conv kernel longer than its input");
    len = (len - c.kernel) / c.stride + 1;
  }
  if (is_dnc(kind)) {
    if (!memory) throw std::invalid_argument("DNC architectures need a memory spec");
    if (memory->rows < 1 || memory->cols < 1 || memory->read_heads < 1)
      throw std::invalid_argument("memory dimensions must be positive");
    if (fuse_size < 1) throw std::invalid_argument("DNC architectures need fuse_size >= 1");
  }
  if (mem_l2 < 0) throw std::invalid_argument("mem_l2 must be nonnegative");
}

std::size_t ParamLayout::add(ParamBlock block) {
  block.offset = size_;
  size_ += block.size();
  blocks_.push_back(std::move(block));
  return blocks_.back().offset;
}

const ParamBlock& ParamLayout::block(const std::string& name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return b;
  throw std::out_of_range("no parameter block '" + name + "'");
}

Vec ParamLayout::memory_mask() const {
  Vec mask = Vec::Zero(static_cast<Eigen::Index>(size_));
  for (const auto& b : blocks_)
    if (b.memory) mask.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size())).setOnes();
  return mask;
}

Vec init_params(const ParamLayout& layout, std::mt19937_64& rng) {
  Vec theta = Vec::Zero(static_cast<Eigen::Index>(layout.size()));
  for (const auto& b : layout.blocks()) {
    auto seg = theta.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.size()));
    switch (b.init) {
      case ParamBlock::Init::Weight: {
        const double a = std::sqrt(6.0 / static_cast<double>(b.fan_in + b.fan_out));
        std::uniform_real_distribution<double> u(-a, a);
        for (Eigen::Index i = 0; i < seg.size(); ++i) seg[i] = u(rng);
        break;
      }
      case ParamBlock::Init::Zero:
        break;
      case ParamBlock::Init::LstmBias: {
        // Gate order i, f, g, o.
        const Eigen::Index n = seg.size() / 4;
        seg.segment(n, n).setOnes();
        break;
      }
    }
  }
  return theta;
}

}  // namespace memnav::nn
