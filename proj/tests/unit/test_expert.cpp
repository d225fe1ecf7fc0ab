#include <cmath>

#include "doctest.h"
#include "memnav/errors.hpp"
#include "memnav/expert.hpp"
#include "memnav/presets.hpp"
#include "oracles.hpp"

using namespace memnav;

namespace {

OccupancyGrid free_grid(int rows, int cols, double res = 1.0) {
  OccupancyGrid g;
  g.rows = rows;
  g.cols = cols;
  g.resolution = res;
  g.cells.assign(static_cast<std::size_t>(rows) * cols, Belief::Free);
  return g;
}

GridMap culdesac(double length, int orientation = 0) {
  MapSpec s;
  s.kind = ObstacleKind::CulDeSac;
  s.length = length;
  s.orientation = orientation;
  return generate_map(s);
}

}  // namespace

TEST_CASE("A* on a free grid costs the Manhattan distance") {
  const OccupancyGrid g = free_grid(10, 10);
  const PlanResult r = astar_plan(g, {0, 0}, {{9, 9}});
  CHECK(r.cost == 18);
  CHECK(r.path.size() == 19);
  CHECK(r.path.front() == Cell{0, 0});
  CHECK(r.path.back() == Cell{9, 9});
  for (std::size_t i = 1; i < r.path.size(); ++i)
    CHECK(std::abs(r.path[i].row - r.path[i - 1].row) + std::abs(r.path[i].col - r.path[i - 1].col) == 1);
}

TEST_CASE("A* matches BFS on random grids") {
  std::mt19937_64 rng(42);
  std::bernoulli_distribution fill(0.3);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    OccupancyGrid g = free_grid(20, 20);
    for (auto& c : g.cells) c = fill(rng) ? Belief::Occupied : Belief::Free;
    g.at({0, 0}) = Belief::Free;
    g.at({19, 19}) = Belief::Free;
    const int want = oracle::bfs_cost(g, {0, 0}, {{19, 19}});
    if (want < 0) {
      CHECK_THROWS_AS(astar_plan(g, {0, 0}, {{19, 19}}), NoPath);
      continue;
    }
    ++solved;
    const PlanResult r = astar_plan(g, {0, 0}, {{19, 19}});
    CHECK(r.cost == want);
    for (const Cell& c : r.path) CHECK_FALSE(g.blocked(c));
  }
  CHECK(solved > 20);
}

TEST_CASE("A* treats unknown cells as traversable") {
  OccupancyGrid g = free_grid(5, 5);
  for (auto& c : g.cells) c = Belief::Unknown;
  CHECK(astar_plan(g, {0, 0}, {{4, 4}}).cost == 8);
  CHECK_THROWS_AS(astar_plan(g, {0, 0}, {}), NoPath);
  g.at({0, 0}) = Belief::Occupied;
  CHECK_THROWS_AS(astar_plan(g, {0, 0}, {{4, 4}}), NoPath);
}

TEST_CASE("A* breaks ties by action order") {
  // Down < Right < Up < Left: from the middle of an open grid with the goal
  // diagonal up-right, the first move is Right.
  const OccupancyGrid g = free_grid(7, 7);
  const PlanResult r = astar_plan(g, {3, 3}, {{5, 5}});
  CHECK(r.path[1] == Cell{3, 4});
  CHECK(astar_plan(g, {3, 3}, {{5, 5}}).path == r.path);
}

TEST_CASE("planning with a lattice stride matches BFS on the same lattice") {
  const Preset p = preset_by_name("small");
  for (const MapSpec& s : builtin_suite(p, SuiteKind::Interp, 8, 30)) {
    const GridMap m = generate_map(s, p.layout);
    const OccupancyGrid g = OccupancyGrid::from_map(m);
    CHECK(full_knowledge_plan(m).cost == oracle::bfs_cost(g, m.start, m.goal_region(), m.stride()));
  }
}

TEST_CASE("mapped cul-de-sac: path exits the mouth and search grows") {
  const GridMap m = culdesac(8);
  const OccupancyGrid g = OccupancyGrid::from_map(m);
  // Start deep inside the corridor.
  const Cell inside{m.start.row, m.start.col + 12};
  REQUIRE_FALSE(m.occupied(inside));
  const PlanResult r = astar_plan(g, inside, m.goal_region(), m.stride());
  CHECK(r.path[1].col < inside.col);
  int min_col = inside.col;
  for (const Cell& c : r.path) min_col = std::min(min_col, c.col);
  CHECK(min_col < m.start.col);

  OccupancyGrid open = g;
  for (auto& c : open.cells) c = Belief::Free;
  CHECK(r.expanded > astar_plan(open, inside, m.goal_region(), m.stride()).expanded);

  const RobotState st = cell_center(inside, m.resolution());
  CHECK(expert_action(g, st, m.goal_region(), m.stride()) == Action::Left);
}

TEST_CASE("expert action straight toward a visible goal") {
  const OccupancyGrid g = free_grid(3, 10);
  CHECK(expert_action(g, cell_center({1, 1}, 1.0), {{1, 8}}, 1) == Action::Right);
  const auto e = one_hot(Action::Up);
  CHECK(e[0] + e[1] + e[2] + e[3] == 1.0);
  CHECK(e[static_cast<int>(Action::Up)] == 1.0);
}

TEST_CASE("occupancy update: max-range beams only clear cells") {
  GridMap m;
  m.rows = m.cols = 40;
  m.occupancy.assign(1600, 0);
  m.spec.resolution = 0.5;
  SensorConfig cfg;
  cfg.n_beams = 144;
  cfg.z_max = 5;
  const RobotState st{10.25, 10.25};
  OccupancyGrid g = OccupancyGrid::unknown_like(m);
  const Observation obs = sense(m, st, Action::Right, cfg);
  update_occupancy(g, st, obs, cfg);
  int free = 0;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      CHECK(g.at({r, c}) != Belief::Occupied);
      if (g.at({r, c}) != Belief::Free) continue;
      ++free;
      const RobotState cc = cell_center({r, c}, 0.5);
      CHECK(std::hypot(cc.x - st.x, cc.y - st.y) <= cfg.z_max + 0.5);
    }
  CHECK(free > 100);
  OccupancyGrid again = g;
  update_occupancy(again, st, obs, cfg);
  CHECK(again == g);
}

TEST_CASE("occupancy update: one beam hitting a wall") {
  GridMap m;
  m.rows = 10;
  m.cols = 20;
  m.spec.resolution = 0.5;
  m.occupancy.assign(200, 0);
  for (int r = 0; r < 10; ++r) m.occupancy[r * 20 + 7] = 1;  // wall spanning x in [3.5, 4)
  SensorConfig cfg;
  cfg.n_beams = 1;
  const RobotState st{2.75, 2.25};
  const Observation obs = sense(m, st, Action::Right, cfg);
  CHECK(obs.ranges[0] == doctest::Approx(0.75));
  OccupancyGrid g = OccupancyGrid::unknown_like(m);
  update_occupancy(g, st, obs, cfg);
  CHECK(g.at({4, 5}) == Belief::Free);
  CHECK(g.at({4, 6}) == Belief::Free);
  CHECK(g.at({4, 7}) == Belief::Occupied);
  CHECK(g.at({4, 8}) == Belief::Unknown);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 20; ++c)
      if (g.at({r, c}) == Belief::Occupied) CHECK(m.occupied({r, c}));
}

TEST_CASE("occupied beliefs never revert") {
  const GridMap m = culdesac(6);
  SensorConfig cfg;
  Expert ex(m, cfg);
  RobotState st = start_state(m);
  std::vector<std::size_t> seen;
  Action heading = initial_heading(m);
  for (int t = 0; t < 30; ++t) {
    const Observation o = sense(m, st, heading, cfg);
    const Action a = ex.observe_and_act(st, o);
    for (std::size_t idx : seen) CHECK(ex.belief().cells[idx] == Belief::Occupied);
    seen.clear();
    for (std::size_t i = 0; i < ex.belief().cells.size(); ++i)
      if (ex.belief().cells[i] == Belief::Occupied) {
        seen.push_back(i);
        CHECK(m.occupancy[i] == 1);
      }
    const StepOutcome out = step(m, st, a, cfg);
    CHECK(out.terminal != Terminal::Collision);
    if (out.terminal == Terminal::Goal) break;
    st = out.next_state;
    heading = a;
  }
}

TEST_CASE("map difficulty: monotone in length, rotation invariant, obstacle costs search") {
  long prev = 0;
  for (int l = 2; l <= 20; ++l) {
    const long d = map_difficulty(culdesac(l));
    CHECK(d >= prev);
    prev = d;
  }
  for (int l : {4, 9, 15})
    for (int o : {90, 180, 270}) CHECK(map_difficulty(culdesac(l, o)) == map_difficulty(culdesac(l, 0)));
  const GridMap m = culdesac(10);
  GridMap empty = m;
  std::fill(empty.occupancy.begin(), empty.occupancy.end(), 0);
  CHECK(map_difficulty(empty) < map_difficulty(m));
  // Expansions on the empty grid stay inside the rectangle spanned by start and goal.
  const long box = (std::abs(m.goal.col - m.start.col) / m.stride() + 1) *
                   (std::abs(m.goal.row - m.start.row) / m.stride() + 1);
  CHECK(map_difficulty(empty) <= box);
}

TEST_CASE("difficulty records serialize as JSON lines") {
  const PlanResult r = full_knowledge_plan(culdesac(4));
  const std::string line = r.to_json_line();
  CHECK(line.find("\"cost\":" + std::to_string(r.cost)) != std::string::npos);
  CHECK(line.find("\"expanded\":") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
}

TEST_CASE("belief expert reaches the goal on every built-in suite") {
  for (const std::string name : {"small", "desk", "large"}) {
    const Preset p = preset_by_name(name);
    for (auto k : {SuiteKind::Train, SuiteKind::Interp, SuiteKind::Extrap}) {
      const int n = name == "large" ? 10 : -1;
      for (const MapSpec& s : builtin_suite(p, k, 1, n)) {
        const GridMap m = generate_map(s, p.layout);
        const ExpertRollout r = expert_rollout(m, p.sensor, 5000);
        CHECK(r.terminal == Terminal::Goal);
        CHECK(r.steps() >= full_knowledge_plan(m).cost);
      }
    }
  }
}

TEST_CASE("expert replanning is deterministic") {
  const GridMap m = culdesac(12, 270);
  SensorConfig cfg;
  const ExpertRollout a = expert_rollout(m, cfg), b = expert_rollout(m, cfg);
  CHECK(a.actions == b.actions);
  CHECK(a.states == b.states);
}
