#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace memnav::nn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ArchKind { FF, LSTM, DncFF, DncLSTM };

const char* to_string(ArchKind k);
ArchKind parse_arch_kind(const std::string& s);
inline bool is_dnc(ArchKind k) { return k == ArchKind::DncFF || k == ArchKind::DncLSTM; }
inline bool has_lstm(ArchKind k) { return k == ArchKind::LSTM || k == ArchKind::DncLSTM; }

// One 1-D convolution over the beam axis.
struct ConvSpec {
  int kernel = 10;
  int stride = 10;
  int channels = 10;
  bool operator==(const ConvSpec&) const = default;
};

struct MemorySpec {
  int rows = 128;  // memory slots
  int cols = 32;   // word width
  int read_heads = 2;
  bool temporal_links = true;
  bool operator==(const MemorySpec&) const = default;
};

struct ArchSpec {
  ArchKind kind = ArchKind::FF;
  int input_dim = 0;
  // Leading input entries that are lidar ranges; the conv front-end reads these.
  int range_dim = 0;
  // Trunk widths. For LSTM kinds the last trunk layer is the LSTM.
  std::vector<int> hidden_sizes;
  std::vector<ConvSpec> conv;
  std::optional<MemorySpec> memory;
  // Width of the fully-connected layer fusing controller output and reads (DNC kinds).
  int fuse_size = 0;
  double mem_l2 = 0.0;

  // Width D of the last upstream layer.
  int feature_dim() const;
  // Width of the vector entering the first trunk layer, without read vectors.
  int trunk_input_dim() const;
  void validate() const;
  bool operator==(const ArchSpec&) const = default;
};

struct ParamBlock {
  enum class Init { Weight, Zero, LstmBias };
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 1;
  bool memory = false;  // part of the regularized memory view
  Init init = Init::Weight;
  // Xavier fan sizes for Weight blocks.
  int fan_in = 0;
  int fan_out = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// Named, contiguous views that partition the flat parameter vector.
class ParamLayout {
 public:
  std::size_t add(ParamBlock block);
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(const std::string& name) const;
  std::size_t size() const { return size_; }
  // 1.0 on coordinates of the memory view, else 0.0.
  Vec memory_mask() const;

 private:
  std::vector<ParamBlock> blocks_;
  std::size_t size_ = 0;
};

// Weights uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)), biases 0,
// LSTM forget-gate bias 1.
Vec init_params(const ParamLayout& layout, std::mt19937_64& rng);

}  // namespace memnav::nn
