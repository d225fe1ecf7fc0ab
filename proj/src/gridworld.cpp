#include "memnav/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "memnav/errors.hpp"

namespace memnav {

Action opposite(Action a) { return static_cast<Action>((static_cast<int>(a) + 2) % 4); }

const char* to_string(Action a) {
  switch (a) {
    case Action::Down: return "down";
    case Action::Right: return "right";
    case Action::Up: return "up";
    case Action::Left: return "left";
  }
  return "?";
}

const char* to_string(ObstacleKind k) {
  return k == ObstacleKind::CulDeSac ? "culdesac" : "walls";
}

ObstacleKind parse_obstacle_kind(const std::string& s) {
  if (s == "culdesac" || s == "cul-de-sac" || s == "CulDeSac") return ObstacleKind::CulDeSac;
  if (s == "walls" || s == "parallel" || s == "ParallelWalls") return ObstacleKind::ParallelWalls;
  throw ParseError("unknown obstacle kind '" + s + "'");
}

Cell action_delta(Action a) {
  switch (a) {
    case Action::Down: return {-1, 0};
    case Action::Right: return {0, 1};
    case Action::Up: return {1, 0};
    case Action::Left: return {0, -1};
  }
  return {0, 0};
}

bool GridMap::in_goal(Cell c) const {
  return std::abs(c.row - goal.row) <= goal_radius && std::abs(c.col - goal.col) <= goal_radius &&
         in_bounds(c);
}

std::vector<Cell> GridMap::goal_region() const {
  std::vector<Cell> out;
  for (int dr = -goal_radius; dr <= goal_radius; ++dr)
    for (int dc = -goal_radius; dc <= goal_radius; ++dc) {
      Cell c{goal.row + dr, goal.col + dc};
      if (in_bounds(c)) out.push_back(c);
    }
  return out;
}

int GridMap::stride() const {
  return std::max(1, static_cast<int>(std::lround(spec.step / spec.resolution)));
}

RobotState cell_center(Cell c, double resolution) {
  return {(c.col + 0.5) * resolution, (c.row + 0.5) * resolution};
}

Cell cell_of(const RobotState& s, double resolution) {
  return {static_cast<int>(std::floor(s.y / resolution)),
          static_cast<int>(std::floor(s.x / resolution))};
}

RobotState start_state(const GridMap& map) { return cell_center(map.start, map.resolution()); }
RobotState goal_position(const GridMap& map) { return cell_center(map.goal, map.resolution()); }

void SensorConfig::validate() const {
  if (n_beams < 1) throw std::invalid_argument("n_beams must be >= 1");
  if (!(z_min < z_max) || z_min < 0) throw std::invalid_argument("require 0 <= z_min < z_max");
  if (!(fov > 0 && fov <= 360)) throw std::invalid_argument("fov must lie in (0, 360]");
  if (!(step_size > 0)) throw std::invalid_argument("step_size must be positive");
}

MapSpec validated(const MapSpec& spec) {
  if (!(spec.length > 0) || !(spec.width > 0) || !(spec.resolution > 0) || !(spec.step > 0))
    throw InfeasibleSpec("length, width, resolution and step must be positive");
  if (spec.orientation != 0 && spec.orientation != 90 && spec.orientation != 180 &&
      spec.orientation != 270)
    throw InfeasibleSpec("orientation must be one of 0, 90, 180, 270");
  double ratio = spec.step / spec.resolution;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1)
    throw InfeasibleSpec("step must be a whole number of cells");
  return spec;
}

namespace {

int to_cells(double meters, double res) { return static_cast<int>(std::lround(meters / res)); }

// One counterclockwise quarter turn of the whole map.
GridMap rotate_ccw(const GridMap& m) {
  GridMap r = m;
  r.rows = m.cols;
  r.cols = m.rows;
  r.occupancy.assign(m.occupancy.size(), 0);
  auto map_cell = [&](Cell c) { return Cell{c.col, m.rows - 1 - c.row}; };
  for (int row = 0; row < m.rows; ++row)
    for (int col = 0; col < m.cols; ++col) {
      Cell n = map_cell({row, col});
      r.occupancy[static_cast<std::size_t>(n.row) * r.cols + n.col] =
          m.occupancy[static_cast<std::size_t>(row) * m.cols + col];
    }
  r.start = map_cell(m.start);
  r.goal = map_cell(m.goal);
  return r;
}

}  // namespace

GridMap generate_map(const MapSpec& raw, const LayoutOptions& layout) {
  const MapSpec spec = validated(raw);
  const double res = spec.resolution;
  const int stride = to_cells(spec.step, res);
  const int len = std::max(1, to_cells(spec.length, res));
  const int wid = std::max(1, to_cells(spec.width, res));
  const int pad = std::max(2 * stride, static_cast<int>(std::ceil(layout.padding / res)));
  const int clearance = std::max(1, to_cells(layout.goal_clearance, res));

  // Canonical frame: obstacle axis along +x (columns), mouth at column x0.
  const int y0 = pad + 1;  // first interior row
  const int x0 = pad;      // first wall column
  const int yc = y0 + (wid - 1) / 2;
  const int end_col = x0 + len;  // closing wall column for a cul-de-sac

  GridMap m;
  m.spec = spec;
  m.goal_radius = layout.goal_radius;
  m.start = {yc + to_cells(spec.row_disp, res), x0 + to_cells(spec.col_disp, res)};
  const int goal_min_col = end_col + 1 + clearance;
  const int hops = (goal_min_col - m.start.col + stride - 1) / stride;
  m.goal = {m.start.row, m.start.col + std::max(1, hops) * stride};
  m.rows = y0 + wid + 1 + pad;
  m.cols = m.goal.col + layout.goal_radius + pad + 1;
  m.occupancy.assign(static_cast<std::size_t>(m.rows) * m.cols, 0);

  auto set = [&](int row, int col) {
    m.occupancy[static_cast<std::size_t>(row) * m.cols + col] = 1;
  };
  for (int col = x0; col < x0 + len; ++col) {
    set(y0 - 1, col);
    set(y0 + wid, col);
  }
  if (spec.kind == ObstacleKind::CulDeSac)
    for (int row = y0 - 1; row <= y0 + wid; ++row) set(row, end_col);

  if (!m.in_bounds(m.start) || m.occupied(m.start))
    throw InfeasibleSpec("start cell is off-grid or inside the obstacle");
  for (const Cell& g : m.goal_region())
    if (m.occupied(g)) throw InfeasibleSpec("goal region overlaps the obstacle");
  if (!m.in_bounds(m.goal)) throw InfeasibleSpec("goal cell is off-grid");

  for (int q = 0; q < spec.orientation / 90; ++q) m = rotate_ccw(m);
  return m;
}

MapSpec sample_spec(const ParamGrid& grid, std::mt19937_64& rng) {
  auto pick = [&rng](const auto& values) {
    if (values.empty()) throw std::invalid_argument("parameter grid has an empty set");
    std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
    return values[d(rng)];
  };
  MapSpec s;
  s.kind = pick(grid.kinds);
  s.length = pick(grid.lengths);
  s.width = pick(grid.widths);
  s.orientation = pick(grid.orientations);
  s.row_disp = pick(grid.row_disps);
  s.col_disp = pick(grid.col_disps);
  s.resolution = grid.resolution;
  s.step = grid.step;
  return s;
}

StepOutcome step(const GridMap& map, const RobotState& state, Action action,
                 const SensorConfig& cfg) {
  const double res = map.resolution();
  const int stride = std::max(1, static_cast<int>(std::lround(cfg.step_size / res)));
  const Cell d = action_delta(action);
  const Cell from = cell_of(state, res);
  StepOutcome out;
  for (int k = 1; k <= stride; ++k) {
    if (map.occupied({from.row + k * d.row, from.col + k * d.col})) {
      out.next_state = state;
      out.reward = -1;
      out.terminal = Terminal::Collision;
      return out;
    }
  }
  out.next_state = {state.x + d.col * cfg.step_size, state.y + d.row * cfg.step_size};
  if (map.in_goal(cell_of(out.next_state, res))) {
    out.reward = 1;
    out.terminal = Terminal::Goal;
  }
  return out;
}

double beam_angle(const SensorConfig& cfg, int k) {
  return cfg.fov * static_cast<double>(k) / cfg.n_beams * std::numbers::pi / 180.0;
}

double ray_cast(const GridMap& map, double x, double y, double angle, double max_range) {
  double hit = max_range;
  walk_ray(map.resolution(), x, y, angle, max_range, [&](Cell c, double t) {
    if (!map.in_bounds(c)) return false;
    if (map.occupied(c)) {
      hit = t;
      return false;
    }
    return true;
  });
  return hit;
}

bool is_rear_beam(double angle, Action heading) {
  Cell d = action_delta(heading);
  return std::cos(angle) * d.col + std::sin(angle) * d.row < -1e-12;
}

Observation sense(const GridMap& map, const RobotState& state, Action heading_hint,
                  const SensorConfig& cfg) {
  Observation obs;
  obs.ranges.resize(static_cast<std::size_t>(cfg.n_beams));
  obs.blinded.assign(static_cast<std::size_t>(cfg.n_beams), 0);
  for (int k = 0; k < cfg.n_beams; ++k) {
    const double a = beam_angle(cfg, k);
    if (cfg.blind_rear && is_rear_beam(a, heading_hint)) {
      obs.ranges[k] = cfg.z_max;
      obs.blinded[k] = 1;
      continue;
    }
    obs.ranges[k] = std::clamp(ray_cast(map, state.x, state.y, a, cfg.z_max), cfg.z_min, cfg.z_max);
  }
  const RobotState g = goal_position(map);
  if (cfg.goal_term == GoalTerm::Heading) {
    obs.goal_term = {std::atan2(state.y - g.y, state.x - g.x)};
  } else {
    obs.goal_term = {(state.x - g.x) / cfg.displacement_scale,
                     (state.y - g.y) / cfg.displacement_scale};
  }
  return obs;
}

Action initial_heading(const GridMap& map) {
  const Cell d{map.goal.row - map.start.row, map.goal.col - map.start.col};
  if (std::abs(d.col) >= std::abs(d.row)) return d.col >= 0 ? Action::Right : Action::Left;
  return d.row >= 0 ? Action::Up : Action::Down;
}

}  // namespace memnav
