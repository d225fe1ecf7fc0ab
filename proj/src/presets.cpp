#include "memnav/presets.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "memnav/map_io.hpp"

namespace memnav {

int input_dim(const SensorConfig& cfg, const InputOptions& opt) {
  const int goal = cfg.goal_term == GoalTerm::Heading ? 1 : 2;
  return cfg.n_beams + goal + (opt.prev_action ? kNumActions : 0);
}

nn::Vec encode_input(const Observation& obs, const SensorConfig& cfg, const InputOptions& opt,
                     std::optional<Action> prev) {
  nn::Vec x(input_dim(cfg, opt));
  int i = 0;
  for (double r : obs.ranges) x[i++] = r / cfg.z_max;
  if (cfg.goal_term == GoalTerm::Heading) {
    x[i++] = obs.goal_term.at(0) / std::numbers::pi;
  } else {
    x[i++] = obs.goal_term.at(0);
    x[i++] = obs.goal_term.at(1);
  }
  if (opt.prev_action)
    for (int a = 0; a < kNumActions; ++a) x[i++] = prev && static_cast<int>(*prev) == a ? 1.0 : 0.0;
  return x;
}

namespace {

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> v;
  for (double x = lo; x <= hi + 1e-9; x += step) v.push_back(x);
  return v;
}

Preset small_preset() {
  Preset p;
  p.name = "small";
  p.sensor.n_beams = 144;
  p.sensor.z_min = 0.1;
  p.sensor.z_max = 5.0;
  p.sensor.step_size = 1.0;
  p.sensor.goal_term = GoalTerm::Heading;
  for (ParamGrid* g : {&p.train, &p.interp, &p.extrap}) {
    g->widths = {1.5};
    g->resolution = 0.5;
    g->step = 1.0;
  }
  p.train.lengths = range(2, 20, 2);
  p.interp.lengths = range(3, 19, 2);
  p.extrap.lengths = range(20, 120, 1);
  p.memory = {128, 32, 2, true};
  return p;
}

Preset large_preset() {
  Preset p;
  p.name = "large";
  p.sensor.n_beams = 1080;
  p.sensor.z_min = 0.1;
  p.sensor.z_max = 2.0;
  p.sensor.step_size = 0.5;
  p.sensor.goal_term = GoalTerm::Displacement;
  for (ParamGrid* g : {&p.train, &p.interp, &p.extrap}) {
    g->resolution = 0.25;
    g->step = 0.5;
  }
  p.train.lengths = {6, 8, 10, 12};
  p.train.widths = {2, 3, 4};
  p.train.row_disps = {-0.5, -0.3, -0.1, 0.1, 0.3, 0.5};
  p.train.col_disps = {-0.5, -0.3, -0.1, 0.1, 0.3, 0.5};
  p.interp.lengths = {7, 9, 11};
  p.extrap.lengths = {20, 24, 28};
  for (ParamGrid* g : {&p.interp, &p.extrap}) {
    g->widths = {2.5, 3.5};
    g->row_disps = {-0.4, -0.2, 0.0, 0.2, 0.4};
    g->col_disps = {-0.5, -0.3, -0.1, 0.1, 0.3, 0.5};
  }
  p.hidden_sizes = {256, 256, 256};
  p.conv = {{10, 10, 10}, {10, 10, 32}};
  p.memory = {256, 64, 4, true};
  p.fuse_size = 256;
  p.n_learners = 32;
  return p;
}

Preset desk_preset() {
  Preset p = small_preset();
  p.name = "desk";
  p.sensor.n_beams = 64;
  p.train.lengths = range(2, 10, 2);
  p.interp.lengths = range(3, 9, 2);
  p.extrap.lengths = range(11, 30, 1);
  p.updates = 50000;
  return p;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

std::vector<std::string> preset_names() { return {"small", "large", "desk"}; }

Preset preset_by_name(const std::string& name) {
  if (name == "small") return small_preset();
  if (name == "large") return large_preset();
  if (name == "desk") return desk_preset();
  throw std::invalid_argument("unknown preset '" + name + "'");
}

nn::ArchSpec make_arch(const Preset& p, nn::ArchKind kind, double mem_l2, const InputOptions& opt) {
  nn::ArchSpec a;
  a.kind = kind;
  a.input_dim = input_dim(p.sensor, opt);
  a.range_dim = p.sensor.n_beams;
  a.hidden_sizes = p.hidden_sizes;
  a.conv = p.conv;
  if (nn::is_dnc(kind)) {
    a.memory = p.memory;
    a.fuse_size = p.fuse_size;
  }
  a.mem_l2 = mem_l2;
  a.validate();
  return a;
}

SuiteKind parse_suite_kind(const std::string& s) {
  if (s == "train") return SuiteKind::Train;
  if (s == "interp") return SuiteKind::Interp;
  if (s == "extrap") return SuiteKind::Extrap;
  throw std::invalid_argument("unknown suite kind '" + s + "'");
}

const char* to_string(SuiteKind k) {
  switch (k) {
    case SuiteKind::Train: return "train";
    case SuiteKind::Interp: return "interp";
    case SuiteKind::Extrap: return "extrap";
  }
  return "?";
}

const ParamGrid& suite_grid(const Preset& p, SuiteKind k) {
  switch (k) {
    case SuiteKind::Train: return p.train;
    case SuiteKind::Interp: return p.interp;
    case SuiteKind::Extrap: return p.extrap;
  }
  return p.train;
}

int default_cap(const Preset& p, SuiteKind k) {
  return k == SuiteKind::Extrap ? p.extrap_cap : p.interp_cap;
}

std::vector<MapSpec> builtin_suite(const Preset& p, SuiteKind k, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  const ParamGrid& grid = suite_grid(p, k);
  std::vector<MapSpec> out;
  if (k != SuiteKind::Extrap) {
    if (count < 0) count = p.interp_maps;
    for (int i = 0; i < count; ++i) out.push_back(sample_spec(grid, rng));
    return out;
  }
  const int per = std::max(1, p.extrap_maps_per_length);
  const int n = static_cast<int>(grid.lengths.size());
  if (count < 0) count = n * per;
  for (int i = 0; i < count; ++i) {
    MapSpec s = sample_spec(grid, rng);
    s.length = grid.lengths[static_cast<std::size_t>((i / per) % n)];
    s.kind = i % 2 == 0 ? ObstacleKind::CulDeSac : ObstacleKind::ParallelWalls;
    out.push_back(s);
  }
  return out;
}

std::optional<SuiteName> parse_builtin_suite(const std::string& name) {
  const auto dash = name.find('-');
  if (dash == std::string::npos) return std::nullopt;
  const std::string kind = name.substr(0, dash), preset = name.substr(dash + 1);
  if (kind != "train" && kind != "interp" && kind != "extrap") return std::nullopt;
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), preset) == names.end()) return std::nullopt;
  return SuiteName{parse_suite_kind(kind), preset};
}

ParamGrid parse_param_grid(const std::string& text, const ParamGrid& base) {
  ParamGrid g = base;
  auto reals = [](const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split(v, ',')) out.push_back(parse_real(s));
    return out;
  };
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "kinds") {
      g.kinds.clear();
      for (const auto& s : split(value, ',')) g.kinds.push_back(parse_obstacle_kind(s));
    } else if (key == "lengths") {
      g.lengths = reals(value);
    } else if (key == "widths") {
      g.widths = reals(value);
    } else if (key == "orientations") {
      g.orientations.clear();
      for (const auto& s : split(value, ',')) g.orientations.push_back(std::stoi(s));
    } else if (key == "row_disps") {
      g.row_disps = reals(value);
    } else if (key == "col_disps") {
      g.col_disps = reals(value);
    } else if (key == "resolution") {
      g.resolution = parse_real(value);
    } else if (key == "step") {
      g.step = parse_real(value);
    } else {
      throw std::invalid_argument("unknown grid key '" + key + "'");
    }
  }
  return g;
}

}  // namespace memnav
