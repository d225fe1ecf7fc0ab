#pragma once

// Last-upstream-layer features Psi(q, h) recorded while the expert drives.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "memnav/gridworld.hpp"
#include "memnav/nn/network.hpp"
#include "memnav/presets.hpp"

namespace memnav::vcdim {

struct FeatureSet {
  Eigen::MatrixXd psi;     // N x D
  Eigen::MatrixXd inputs;  // N x input_dim, the q_t fed to the network
  std::vector<int> labels; // expert action index
  std::vector<int> episode;
  std::vector<int> net_choice;  // network argmax at each row
  std::string arch_id;
  std::uint64_t seed = 0;
  std::string suite;

  int size() const { return static_cast<int>(labels.size()); }
  std::array<int, kNumActions> class_counts() const;
  // +1 for `positive`, -1 otherwise.
  std::vector<int> one_vs_all(int positive) const;
};

// For each map: the belief expert chooses every action; the network runs
// alongside on the same observations from a fresh memory state. Maps where the
// expert fails to reach the goal within step_cap are skipped.
FeatureSet collect_features(const nn::Network& net, const nn::Vec& theta,
                            const std::vector<GridMap>& maps, const SensorConfig& cfg,
                            const InputOptions& input, int step_cap = 500);

// Same-episode row pairs whose network inputs are bitwise identical while the
// expert labels are opposite actions; every row is used at most once.
std::vector<std::pair<int, int>> conflicting_pairs(const FeatureSet& fs);

// CSV with a `#` header line (N, D, class counts, arch, seed, suite), then
// label,episode,psi_0..psi_{D-1}.
std::string feature_csv(const FeatureSet& fs);
FeatureSet parse_feature_csv(const std::string& text);

}  // namespace memnav::vcdim
