#pragma once

// External memory unit of a differentiable neural computer: content-based
// addressing, usage-driven allocation and temporal link reads, with one write
// head and `read_heads` read heads.
//
// Gradients do not cross time steps through this unit: the previous memory
// state is a constant input of memory_step, and memory_step_backward returns
// only the gradient with respect to the current interface vector.

#include <vector>

#include "memnav/nn/arch.hpp"

namespace memnav::nn {

struct DncState {
  Mat memory;         // rows x cols
  Mat read_weights;   // rows x read_heads
  Vec write_weights;  // rows
  Vec usage;          // rows
  Vec precedence;     // rows
  Mat link;           // rows x rows
  Mat read_vectors;   // cols x read_heads

  static DncState zeros(const MemorySpec& spec);
  bool operator==(const DncState& o) const;
};

// Interface size: read keys, read strengths, write key, write strength,
// erase vector, write vector, free gates, allocation gate, write gate, read modes.
int interface_size(const MemorySpec& spec);

// Interface vector after its activations.
struct Interface {
  Mat read_keys;       // cols x R
  Vec read_strengths;  // R, oneplus
  Vec write_key;       // cols
  double write_strength = 1.0;  // oneplus
  Vec erase;           // cols, sigmoid
  Vec write_vector;    // cols
  Vec free_gates;      // R, sigmoid
  double alloc_gate = 0.0;  // sigmoid
  double write_gate = 0.0;  // sigmoid
  Mat read_modes;      // 3 x R softmax columns: backward, content, forward
};

Interface parse_interface(const MemorySpec& spec, const Vec& raw);

// Cosine-similarity content weighting softmax(strength * cos(key, row_j)).
struct ContentTrace {
  Vec sims;    // cosine similarities
  Vec weights;
  Vec dots;
  Vec row_norms;
  double key_norm = 0.0;
};
Vec content_weights(const Mat& memory, const Vec& key, double strength, ContentTrace* trace);

struct MemoryStepTrace {
  Vec raw;  // interface vector before activations
  Interface iface;
  DncState prev;
  DncState next;
  Vec usage_pre;  // retention-free usage before the free-gate product
  Vec retention;  // psi
  std::vector<int> order;  // usage sort order, ascending
  Vec alloc;
  ContentTrace write_content;
  std::vector<ContentTrace> read_content;
  Mat forward_w;   // rows x R
  Mat backward_w;  // rows x R
};

// One write update then one read update. Writes the new state into `next`.
void memory_step(const MemorySpec& spec, const Vec& raw_interface, const DncState& prev,
                 DncState& next, MemoryStepTrace* trace);

// Gradient of the step's read vectors (cols x R) back to the raw interface.
Vec memory_step_backward(const MemorySpec& spec, const MemoryStepTrace& trace,
                         const Mat& d_read_vectors);

}  // namespace memnav::nn
