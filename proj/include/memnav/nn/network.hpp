#pragma once

// Policy networks: feed-forward, LSTM, and DNC over either controller, all
// ending in one linear softmax readout over the four actions.

#include <array>
#include <optional>
#include <vector>

#include "memnav/gridworld.hpp"
#include "memnav/nn/arch.hpp"
#include "memnav/nn/dnc.hpp"

namespace memnav::nn {

inline constexpr int kBpttWindow = 5;

struct LstmState {
  Vec h;
  Vec c;
};

// Recurrent state h_t. Empty for FF networks.
struct MemoryState {
  std::vector<LstmState> lstm;  // one entry per trunk layer (unused for dense layers)
  std::optional<DncState> dnc;
};

struct PolicyOutput {
  Vec logits;  // 4
  Vec probs;   // 4
  Vec psi;     // D, last upstream layer
  Action chosen = Action::Down;  // argmax
};

struct LayerTrace {
  Vec input;
  Vec out;
  // LSTM only
  Vec h_prev, c_prev, gates, c, tanh_c;
};

struct ConvTrace {
  Mat input;   // channels_in x positions_in
  Mat output;  // channels_out x positions_out (post tanh)
};

// Activations of one forward step, enough to backpropagate it.
struct StepTrace {
  Vec input;
  std::vector<ConvTrace> conv;
  std::vector<LayerTrace> layers;
  std::optional<MemoryStepTrace> memory;
  Vec fuse_input;
  Vec psi;
  Vec logits;
  Vec probs;
};

class Network {
 public:
  explicit Network(ArchSpec arch);

  const ArchSpec& arch() const { return arch_; }
  const ParamLayout& layout() const { return layout_; }
  std::size_t num_params() const { return layout_.size(); }

  Vec init_params(std::mt19937_64& rng) const { return nn::init_params(layout_, rng); }
  MemoryState initial_state() const;

  // Advances `state` in place; fills `trace` when given.
  PolicyOutput forward(const Vec& theta, const Vec& input, MemoryState& state,
                       StepTrace* trace = nullptr) const;

  // Mean cross-entropy over the window plus (mem_l2 / 2) * |theta_memory|^2.
  double loss(const std::vector<PolicyOutput>& outputs, const std::vector<Action>& labels,
              const Vec& theta) const;
  double loss_from_traces(const std::vector<StepTrace>& window, const std::vector<Action>& labels,
                          const Vec& theta) const;

  // Gradient of loss_from_traces through the window. Recurrent LSTM state
  // carries gradient across the window's steps; the external memory does not.
  Vec backward(const Vec& theta, const std::vector<StepTrace>& window,
               const std::vector<Action>& labels) const;

  // Recomputes the window loss at `theta` from the window's starting LSTM
  // state, holding each step's incoming external memory state fixed at the
  // recorded value. This is the function `backward` differentiates.
  double replay_loss(const Vec& theta, const std::vector<StepTrace>& window,
                     const std::vector<Action>& labels) const;

 private:
  struct DenseIdx {
    std::size_t w = 0, w_read = 0, b = 0;
    int in = 0, read_in = 0, out = 0;
    bool lstm = false;
    std::size_t u = 0;  // LSTM recurrent weights
  };
  struct ConvIdx {
    std::size_t w = 0, b = 0;
    int kernel = 0, stride = 0, in_ch = 0, out_ch = 0, in_len = 0, out_len = 0;
  };

  ArchSpec arch_;
  ParamLayout layout_;
  std::vector<ConvIdx> conv_;
  std::vector<DenseIdx> layers_;
  std::size_t iface_w_ = 0, iface_b_ = 0;
  int iface_size_ = 0;
  std::size_t fuse_wh_ = 0, fuse_wr_ = 0, fuse_b_ = 0;
  std::size_t readout_w_ = 0, readout_b_ = 0;
  Vec memory_mask_;
  int read_dim_ = 0;
};

Vec softmax(const Vec& logits);
double cross_entropy(const Vec& logits, Action label);
int argmax(const Vec& v);

}  // namespace memnav::nn
