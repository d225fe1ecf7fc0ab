#pragma once

// Grid environment: parameterized cul-de-sac / parallel-wall obstacles,
// ray-cast lidar and the reward/termination rules of the navigation MDP.

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace memnav {

enum class ObstacleKind { CulDeSac, ParallelWalls };

// Index order is fixed; it is the one-hot label layout.
enum class Action : int { Down = 0, Right = 1, Up = 2, Left = 3 };
inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, 4> kAllActions{Action::Down, Action::Right, Action::Up,
                                                   Action::Left};

Action opposite(Action a);
const char* to_string(Action a);
const char* to_string(ObstacleKind k);
ObstacleKind parse_obstacle_kind(const std::string& s);

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

// Cell offset of one grid cell along the action axis. Rows index +y, columns +x.
Cell action_delta(Action a);

struct MapSpec {
  ObstacleKind kind = ObstacleKind::CulDeSac;
  double length = 10.0;    // m
  double width = 1.5;      // m, free interior width between the walls
  int orientation = 0;     // degrees, one of 0/90/180/270, counterclockwise
  double row_disp = 0.0;   // m, start shift across the obstacle axis
  double col_disp = 0.0;   // m, start shift along the obstacle axis
  double resolution = 0.5; // m per cell
  double step = 1.0;       // m per move; the start/goal lattice spacing

  bool operator==(const MapSpec&) const = default;
};

// Layout constants that are not part of the sampled parameter tuple.
struct LayoutOptions {
  double padding = 3.0;         // m of free space around the obstacle
  double goal_clearance = 1.0;  // m between the far end of the obstacle and the goal
  int goal_radius = 0;          // cells (Chebyshev) around the goal cell
};

struct GridMap {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> occupancy;  // row-major, 1 = obstacle
  Cell start;
  Cell goal;
  int goal_radius = 0;
  MapSpec spec;

  bool in_bounds(Cell c) const { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; }
  // Out-of-bounds cells count as occupied.
  bool occupied(Cell c) const {
    return !in_bounds(c) || occupancy[static_cast<std::size_t>(c.row) * cols + c.col] != 0;
  }
  bool in_goal(Cell c) const;
  std::vector<Cell> goal_region() const;
  double resolution() const { return spec.resolution; }
  // Lattice stride in cells.
  int stride() const;

  bool operator==(const GridMap&) const = default;
};

struct RobotState {
  double x = 0.0;  // m
  double y = 0.0;  // m
  bool operator==(const RobotState&) const = default;
};

RobotState cell_center(Cell c, double resolution);
Cell cell_of(const RobotState& s, double resolution);
RobotState start_state(const GridMap& map);
RobotState goal_position(const GridMap& map);

enum class GoalTerm { Heading, Displacement };

struct SensorConfig {
  int n_beams = 144;
  double z_min = 0.1;
  double z_max = 5.0;
  double fov = 360.0;  // degrees
  double step_size = 1.0;
  bool blind_rear = false;
  GoalTerm goal_term = GoalTerm::Heading;
  // Displacement goal terms are divided by this before they enter the network.
  double displacement_scale = 10.0;

  void validate() const;
};

struct Observation {
  std::vector<double> ranges;
  std::vector<double> goal_term;      // 1 entry (heading) or 2 (displacement)
  std::vector<std::uint8_t> blinded;  // 1 where the beam fell in the hidden rear sector
};

enum class Terminal { None, Goal, Collision };

struct StepOutcome {
  RobotState next_state;
  int reward = 0;
  Terminal terminal = Terminal::None;
};

MapSpec validated(const MapSpec& spec);
GridMap generate_map(const MapSpec& spec, const LayoutOptions& layout = {});

// Candidate values per parameter; sample_spec draws each independently.
struct ParamGrid {
  std::vector<ObstacleKind> kinds{ObstacleKind::CulDeSac, ObstacleKind::ParallelWalls};
  std::vector<double> lengths;
  std::vector<double> widths{1.5};
  std::vector<int> orientations{0, 90, 180, 270};
  std::vector<double> row_disps{0.0};
  std::vector<double> col_disps{0.0};
  double resolution = 0.5;
  double step = 1.0;
};

MapSpec sample_spec(const ParamGrid& grid, std::mt19937_64& rng);

StepOutcome step(const GridMap& map, const RobotState& state, Action action,
                 const SensorConfig& cfg);

// Visits the cells pierced by a ray in order, starting with the origin cell at
// t = 0, calling visit(cell, entry_distance) until it returns false or the
// entry distance reaches max_range. An exact corner crossing moves
// diagonally without touching either side cell.
template <class Visit>
void walk_ray(double res, double x, double y, double angle, double max_range, Visit&& visit) {
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  int ix = static_cast<int>(std::floor(x / res));
  int iy = static_cast<int>(std::floor(y / res));
  if (!visit(Cell{iy, ix}, 0.0)) return;
  constexpr double kInf = 1e300;
  const int sx = dx > 0 ? 1 : -1;
  const int sy = dy > 0 ? 1 : -1;
  double t_max_x = kInf, t_delta_x = kInf, t_max_y = kInf, t_delta_y = kInf;
  // Direction cosines below 1e-12 count as exactly axial.
  if (std::abs(dx) > 1e-12) {
    t_max_x = ((sx > 0 ? ix + 1 : ix) * res - x) / dx;
    t_delta_x = res / std::abs(dx);
  }
  if (std::abs(dy) > 1e-12) {
    t_max_y = ((sy > 0 ? iy + 1 : iy) * res - y) / dy;
    t_delta_y = res / std::abs(dy);
  }
  const double tie_eps = 1e-12 * (1.0 + max_range);
  while (true) {
    double t;
    if (std::abs(t_max_x - t_max_y) <= tie_eps) {
      t = t_max_x;
      ix += sx;
      iy += sy;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    } else if (t_max_x < t_max_y) {
      t = t_max_x;
      ix += sx;
      t_max_x += t_delta_x;
    } else {
      t = t_max_y;
      iy += sy;
      t_max_y += t_delta_y;
    }
    if (t >= max_range) return;
    if (!visit(Cell{iy, ix}, t)) return;
  }
}

// Beam k direction in radians, counterclockwise from +x.
double beam_angle(const SensorConfig& cfg, int k);
// Distance from (x, y) along `angle` to the first occupied cell boundary, or
// `max_range` if none is met first. Cells outside the grid do not reflect.
double ray_cast(const GridMap& map, double x, double y, double angle, double max_range);
// True if the beam direction points into the half-plane behind `heading`.
bool is_rear_beam(double angle, Action heading);

Observation sense(const GridMap& map, const RobotState& state, Action heading_hint,
                  const SensorConfig& cfg);

// Axis action whose direction has the largest component toward the goal; the
// robot starts oriented this way.
Action initial_heading(const GridMap& map);

}  // namespace memnav
