#include "memnav/expert.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <queue>
#include <tuple>

#include "json.hpp"
#include "memnav/errors.hpp"

namespace memnav {

OccupancyGrid OccupancyGrid::unknown_like(const GridMap& map) {
  OccupancyGrid g;
  g.rows = map.rows;
  g.cols = map.cols;
  g.resolution = map.resolution();
  g.cells.assign(map.occupancy.size(), Belief::Unknown);
  return g;
}

OccupancyGrid OccupancyGrid::from_map(const GridMap& map) {
  OccupancyGrid g = unknown_like(map);
  for (std::size_t i = 0; i < map.occupancy.size(); ++i)
    g.cells[i] = map.occupancy[i] ? Belief::Occupied : Belief::Free;
  return g;
}

std::string PlanResult::to_json_line() const {
  nlohmann::json j;
  j["cost"] = cost;
  j["expanded"] = expanded;
  auto& p = j["path"] = nlohmann::json::array();
  for (const Cell& c : path) p.push_back({c.row, c.col});
  return j.dump();
}

void update_occupancy(OccupancyGrid& grid, const RobotState& state, const Observation& obs,
                      const SensorConfig& cfg) {
  for (int k = 0; k < static_cast<int>(obs.ranges.size()); ++k) {
    if (!obs.blinded.empty() && obs.blinded[k]) continue;
    const double d = obs.ranges[k];
    const bool hit = d < cfg.z_max;
    walk_ray(grid.resolution, state.x, state.y, beam_angle(cfg, k), cfg.z_max + grid.resolution,
             [&](Cell c, double t) {
               if (!grid.in_bounds(c)) return false;
               if (t < d - 1e-9) {
                 if (grid.at(c) != Belief::Occupied) grid.at(c) = Belief::Free;
                 return true;
               }
               if (hit) grid.at(c) = Belief::Occupied;
               return false;
             });
  }
}

namespace {

bool move_legal(const OccupancyGrid& grid, Cell from, Cell d, int stride) {
  for (int k = 1; k <= stride; ++k)
    if (grid.blocked({from.row + k * d.row, from.col + k * d.col})) return false;
  return true;
}

}  // namespace

PlanResult astar_plan(const OccupancyGrid& grid, Cell start, const std::vector<Cell>& goal_region,
                      int stride, int order_shift) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  if (grid.blocked(start)) throw NoPath("start cell is blocked");
  if (goal_region.empty()) throw NoPath("empty goal region");

  const int n = grid.rows * grid.cols;
  auto index = [&](Cell c) { return c.row * grid.cols + c.col; };
  std::vector<std::uint8_t> is_goal(static_cast<std::size_t>(n), 0);
  for (const Cell& g : goal_region)
    if (grid.in_bounds(g)) is_goal[index(g)] = 1;

  auto heuristic = [&](Cell c) {
    int best = INT_MAX;
    for (const Cell& g : goal_region) {
      int m = std::abs(c.row - g.row) + std::abs(c.col - g.col);
      best = std::min(best, (m + stride - 1) / stride);
    }
    return best;
  };

  using Entry = std::tuple<int, int, long, int>;  // f, h, sequence, node
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<int> g_cost(static_cast<std::size_t>(n), INT_MAX);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<std::uint8_t> closed(static_cast<std::size_t>(n), 0);

  long seq = 0;
  const int s = index(start);
  g_cost[s] = 0;
  int h0 = heuristic(start);
  open.emplace(h0, h0, seq++, s);

  PlanResult result;
  while (!open.empty()) {
    auto [f, h, order, node] = open.top();
    open.pop();
    if (closed[node]) continue;
    closed[node] = 1;
    ++result.expanded;
    const Cell c{node / grid.cols, node % grid.cols};
    if (is_goal[node]) {
      for (int v = node; v != -1; v = parent[v]) result.path.push_back({v / grid.cols, v % grid.cols});
      std::reverse(result.path.begin(), result.path.end());
      result.cost = static_cast<int>(result.path.size()) - 1;
      return result;
    }
    for (int k = 0; k < kNumActions; ++k) {
      const int a = ((k + order_shift) % kNumActions + kNumActions) % kNumActions;
      const Cell d = action_delta(kAllActions[static_cast<std::size_t>(a)]);
      if (!move_legal(grid, c, d, stride)) continue;
      const Cell nc{c.row + stride * d.row, c.col + stride * d.col};
      const int ni = index(nc);
      const int ng = g_cost[node] + 1;
      if (closed[ni] || ng >= g_cost[ni]) continue;
      g_cost[ni] = ng;
      parent[ni] = node;
      const int nh = heuristic(nc);
      open.emplace(ng + nh, nh, seq++, ni);
    }
  }
  throw NoPath("goal region unreachable");
}

Action expert_action(const OccupancyGrid& grid, const RobotState& state,
                     const std::vector<Cell>& goal_region, int stride) {
  const PlanResult plan = astar_plan(grid, cell_of(state, grid.resolution), goal_region, stride);
  if (plan.path.size() < 2) return Action::Down;  // already inside the goal region
  const Cell a = plan.path[0], b = plan.path[1];
  if (b.row < a.row) return Action::Down;
  if (b.col > a.col) return Action::Right;
  if (b.row > a.row) return Action::Up;
  return Action::Left;
}

std::array<double, kNumActions> one_hot(Action a) {
  std::array<double, kNumActions> e{};
  e[static_cast<std::size_t>(a)] = 1.0;
  return e;
}

PlanResult full_knowledge_plan(const GridMap& map) {
  return astar_plan(OccupancyGrid::from_map(map), map.start, map.goal_region(), map.stride(),
                    map.spec.orientation / 90);
}

long map_difficulty(const GridMap& map) { return full_knowledge_plan(map).expanded; }

Expert::Expert(const GridMap& map, const SensorConfig& cfg)
    : map_(&map), cfg_(cfg), belief_(OccupancyGrid::unknown_like(map)), goal_(map.goal_region()) {}

Action Expert::observe_and_act(const RobotState& state, const Observation& obs) {
  update_occupancy(belief_, state, obs, cfg_);
  return expert_action(belief_, state, goal_, map_->stride());
}

ExpertRollout expert_rollout(const GridMap& map, const SensorConfig& cfg, int step_cap) {
  ExpertRollout out;
  Expert expert(map, cfg);
  RobotState s = start_state(map);
  Action heading = initial_heading(map);
  out.states.push_back(s);
  while (out.steps() < step_cap) {
    const Observation obs = sense(map, s, heading, cfg);
    const Action a = expert.observe_and_act(s, obs);
    const StepOutcome o = step(map, s, a, cfg);
    out.actions.push_back(a);
    heading = a;
    s = o.next_state;
    out.states.push_back(s);
    if (o.terminal != Terminal::None) {
      out.terminal = o.terminal;
      break;
    }
  }
  return out;
}

}  // namespace memnav
