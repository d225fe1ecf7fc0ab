#pragma once

#include <random>
#include <vector>

#include "memnav/nn/network.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace memnav;
using namespace memnav::nn;

// Toy architecture of every kind: at most 16 units per layer, optional conv front-end.
inline ArchSpec toy_arch(ArchKind kind, bool conv = true, double mem_l2 = 0.01) {
  ArchSpec a;
  a.kind = kind;
  a.input_dim = 23;
  a.range_dim = 20;
  a.hidden_sizes = {8, 6};
  if (conv) a.conv = {{4, 2, 3}, {3, 2, 2}};
  if (is_dnc(kind)) {
    a.memory = MemorySpec{6, 4, 2, true};
    a.fuse_size = 5;
  }
  a.mem_l2 = mem_l2;
  return a;
}

struct Window {
  std::vector<StepTrace> traces;
  std::vector<Action> labels;
};

// Runs `warmup` steps to populate recurrent state, then records `len` traced steps.
inline Window random_window(const Network& net, const Vec& theta, std::mt19937_64& rng,
                            int warmup = 3, int len = kBpttWindow) {
  MemoryState st = net.initial_state();
  std::normal_distribution<double> n;
  std::uniform_int_distribution<int> lab(0, kNumActions - 1);
  Window w;
  for (int t = 0; t < warmup + len; ++t) {
    Vec x(net.arch().input_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = n(rng);
    StepTrace tr;
    net.forward(theta, x, st, &tr);
    if (t >= warmup) {
      w.traces.push_back(std::move(tr));
      w.labels.push_back(static_cast<Action>(lab(rng)));
    }
  }
  return w;
}

struct GradCheck {
  double worst = 0.0;
  int checked = 0;
};

// Compares backward against central differences of replay_loss on `coords`
// coordinates drawn without replacement.
inline GradCheck grad_check(const Network& net, const Vec& theta, const Window& w, int coords,
                            std::mt19937_64& rng) {
  const Vec g = net.backward(theta, w.traces, w.labels);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(theta.size()));
  for (Eigen::Index i = 0; i < theta.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  GradCheck out;
  auto f = [&](const Vec& th) { return net.replay_loss(th, w.traces, w.labels); };
  for (int k = 0; k < coords && k < static_cast<int>(idx.size()); ++k) {
    const Eigen::Index i = idx[static_cast<std::size_t>(k)];
    const double fd = oracle::central_difference(f, theta, i);
    out.worst = std::max(out.worst, oracle::rel_error(g[i], fd));
    ++out.checked;
  }
  return out;
}

}  // namespace fixture
