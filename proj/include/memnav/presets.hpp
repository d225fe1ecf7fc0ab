#pragma once

// Named configurations: sensor geometry, map parameter grids, network sizes
// and training defaults. `small` and `large` are the two published setups;
// `desk` is `small` shrunk to desk-scale runtime.

#include <optional>
#include <string>
#include <vector>

#include "memnav/gridworld.hpp"
#include "memnav/nn/arch.hpp"
#include "memnav/nn/rmsprop.hpp"

namespace memnav {

struct InputOptions {
  bool prev_action = false;  // append a one-hot of the previous action
  bool operator==(const InputOptions&) const = default;
};

// Ranges divided by z_max, then the goal term (heading divided by pi, or the
// scaled displacement), then the optional previous-action one-hot.
int input_dim(const SensorConfig& cfg, const InputOptions& opt);
nn::Vec encode_input(const Observation& obs, const SensorConfig& cfg, const InputOptions& opt,
                     std::optional<Action> prev);

struct Preset {
  std::string name;
  SensorConfig sensor;
  LayoutOptions layout;
  ParamGrid train;
  ParamGrid interp;
  ParamGrid extrap;
  int interp_maps = 100;
  int extrap_maps_per_length = 2;
  int interp_cap = 200;
  int extrap_cap = 500;

  std::vector<int> hidden_sizes{128, 128, 128};
  std::vector<nn::ConvSpec> conv;
  nn::MemorySpec memory;
  int fuse_size = 128;

  nn::RmsPropConfig optimizer;
  int n_learners = 4;
  long updates = 30000;  // J_max
  int window = 5;        // j_max, also the BPTT truncation
  int t_max = 200;
  double gamma = 0.99;   // discount of the MDP tuple; supervised training ignores it
  int vc_episodes = 100;
};

Preset preset_by_name(const std::string& name);
std::vector<std::string> preset_names();

nn::ArchSpec make_arch(const Preset& p, nn::ArchKind kind, double mem_l2,
                       const InputOptions& opt = {});

enum class SuiteKind { Train, Interp, Extrap };
SuiteKind parse_suite_kind(const std::string& s);
const char* to_string(SuiteKind k);
const ParamGrid& suite_grid(const Preset& p, SuiteKind k);
int default_cap(const Preset& p, SuiteKind k);

// Train and interpolation suites draw `count` specs from their grid (default
// interp_maps). The extrapolation suite walks its lengths in order with
// extrap_maps_per_length maps each, alternating obstacle kinds, and samples the
// remaining parameters; `count` truncates or cycles that walk.
std::vector<MapSpec> builtin_suite(const Preset& p, SuiteKind k, std::uint64_t seed, int count = -1);

// "interp-small" style names.
struct SuiteName {
  SuiteKind kind;
  std::string preset;
};
std::optional<SuiteName> parse_builtin_suite(const std::string& name);

// Flat key=value grid file: kinds, lengths, widths, orientations, row_disps,
// col_disps (comma-separated lists), resolution, step.
ParamGrid parse_param_grid(const std::string& text, const ParamGrid& base);

}  // namespace memnav
