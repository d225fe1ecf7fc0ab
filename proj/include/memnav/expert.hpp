#pragma once

// The supervision oracle: incremental occupancy-grid mapping from lidar plus
// A* replanning, and the node-expansion map-difficulty metric.

#include <cstdint>
#include <string>
#include <vector>

#include "memnav/gridworld.hpp"

namespace memnav {

enum class Belief : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

struct OccupancyGrid {
  int rows = 0;
  int cols = 0;
  double resolution = 0.5;
  std::vector<Belief> cells;

  static OccupancyGrid unknown_like(const GridMap& map);
  // Ground-truth belief: every cell Free or Occupied.
  static OccupancyGrid from_map(const GridMap& map);

  bool in_bounds(Cell c) const { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; }
  Belief at(Cell c) const { return cells[static_cast<std::size_t>(c.row) * cols + c.col]; }
  Belief& at(Cell c) { return cells[static_cast<std::size_t>(c.row) * cols + c.col]; }
  // Out of bounds or Occupied.
  bool blocked(Cell c) const { return !in_bounds(c) || at(c) == Belief::Occupied; }

  bool operator==(const OccupancyGrid&) const = default;
};

struct PlanResult {
  std::vector<Cell> path;  // start .. goal, consecutive cells one lattice move apart
  long expanded = 0;       // pops from the open set
  int cost = 0;            // number of moves, path.size() - 1

  std::string to_json_line() const;
};

void update_occupancy(OccupancyGrid& grid, const RobotState& state, const Observation& obs,
                      const SensorConfig& cfg);

// A* over lattice moves of `stride` cells. Unknown is traversable, Occupied and
// off-grid are blocked; a move is legal when every cell it sweeps is unblocked.
// Heuristic: lattice Manhattan distance to the nearest goal cell. Equal f is
// broken by smaller h, then by generation order Down < Right < Up < Left,
// cyclically shifted by `order_shift` actions.
PlanResult astar_plan(const OccupancyGrid& grid, Cell start, const std::vector<Cell>& goal_region,
                      int stride = 1, int order_shift = 0);

Action expert_action(const OccupancyGrid& grid, const RobotState& state,
                     const std::vector<Cell>& goal_region, int stride);

std::array<double, kNumActions> one_hot(Action a);

// Plans on the true map with the generation order turned with the map's
// orientation, so rotated copies of a map expand the same number of nodes.
long map_difficulty(const GridMap& map);
PlanResult full_knowledge_plan(const GridMap& map);

// Belief-driven expert that replans every step from its own occupancy grid.
class Expert {
 public:
  Expert(const GridMap& map, const SensorConfig& cfg);
  // Fold in the observation taken at `state`, then replan.
  Action observe_and_act(const RobotState& state, const Observation& obs);
  const OccupancyGrid& belief() const { return belief_; }

 private:
  const GridMap* map_;
  SensorConfig cfg_;
  OccupancyGrid belief_;
  std::vector<Cell> goal_;
};

struct ExpertRollout {
  std::vector<RobotState> states;  // visited states, start first
  std::vector<Action> actions;
  Terminal terminal = Terminal::None;
  int steps() const { return static_cast<int>(actions.size()); }
};

// Run the belief expert from the map start until goal, collision or step_cap.
ExpertRollout expert_rollout(const GridMap& map, const SensorConfig& cfg, int step_cap = 100000);

}  // namespace memnav
