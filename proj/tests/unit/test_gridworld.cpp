#include <cmath>
#include <numbers>
#include <climits>
#include <set>

#include "doctest.h"
#include "memnav/errors.hpp"
#include "memnav/gridworld.hpp"
#include "memnav/map_io.hpp"
#include "memnav/presets.hpp"
#include "oracles.hpp"

using namespace memnav;

namespace {

GridMap empty_map(int rows, int cols, double res = 1.0) {
  GridMap m;
  m.rows = rows;
  m.cols = cols;
  m.occupancy.assign(static_cast<std::size_t>(rows) * cols, 0);
  m.spec.resolution = res;
  m.spec.step = res;
  m.goal = {rows - 1, cols - 1};
  return m;
}

void set_cell(GridMap& m, int r, int c) { m.occupancy[static_cast<std::size_t>(r) * m.cols + c] = 1; }

std::string crop(const GridMap& m, int r0, int r1, int c0, int c1) {
  std::string s;
  for (int r = r1; r >= r0; --r) {
    for (int c = c0; c <= c1; ++c) s += m.occupied({r, c}) ? '#' : '.';
    s += '\n';
  }
  return s;
}

}  // namespace

TEST_CASE("action index order and opposites") {
  CHECK(static_cast<int>(Action::Down) == 0);
  CHECK(static_cast<int>(Action::Right) == 1);
  CHECK(static_cast<int>(Action::Up) == 2);
  CHECK(static_cast<int>(Action::Left) == 3);
  for (Action a : kAllActions) {
    CHECK(opposite(opposite(a)) == a);
    const Cell d = action_delta(a), e = action_delta(opposite(a));
    CHECK(d.row == -e.row);
    CHECK(d.col == -e.col);
  }
}

TEST_CASE("small cul-de-sac rasterizes to a 4x4 U") {
  MapSpec s;
  s.kind = ObstacleKind::CulDeSac;
  s.length = 2;
  s.width = 2;
  s.resolution = 0.5;
  const GridMap m = generate_map(s);
  // Geometric membership: walls one cell thick around a 4x4 interior, closed at the far end.
  const int pad = 6, y0 = pad + 1, x0 = pad;
  const std::string expect =
      "#####\n"
      "....#\n"
      "....#\n"
      "....#\n"
      "....#\n"
      "#####\n";
  CHECK(crop(m, y0 - 1, y0 + 4, x0, x0 + 4) == expect);
  int walls = 0;
  for (auto v : m.occupancy) walls += v;
  CHECK(walls == 4 + 4 + 6);
  CHECK_FALSE(m.occupied(m.start));
  CHECK(m.start.col == x0);
  CHECK(m.goal.col > x0 + 4);
}

TEST_CASE("parallel walls corridor is open at both ends") {
  MapSpec s;
  s.kind = ObstacleKind::ParallelWalls;
  s.length = 10;
  s.width = 3;
  s.resolution = 0.5;
  s.step = 0.5;
  const GridMap m = generate_map(s);
  const int x0 = 6, y0 = 7;
  for (int r = y0; r < y0 + 6; ++r) {
    CHECK_FALSE(m.occupied({r, x0 - 1}));
    CHECK_FALSE(m.occupied({r, x0 + 20}));
    for (int c = x0; c < x0 + 20; ++c) CHECK_FALSE(m.occupied({r, c}));
  }
  for (int c = x0; c < x0 + 20; ++c) {
    CHECK(m.occupied({y0 - 1, c}));
    CHECK(m.occupied({y0 + 6, c}));
  }
  // Start at the mouth center.
  CHECK(m.start.row == y0 + 2);
  CHECK(m.start.col == x0);
}

TEST_CASE("180 degree orientation is a point reflection") {
  for (auto kind : {ObstacleKind::CulDeSac, ObstacleKind::ParallelWalls}) {
    MapSpec s;
    s.kind = kind;
    s.length = 7;
    s.width = 1.5;
    const GridMap a = generate_map(s);
    s.orientation = 180;
    const GridMap b = generate_map(s);
    REQUIRE(a.rows == b.rows);
    REQUIRE(a.cols == b.cols);
    for (int r = 0; r < a.rows; ++r)
      for (int c = 0; c < a.cols; ++c)
        CHECK(a.occupied({r, c}) == b.occupied({a.rows - 1 - r, a.cols - 1 - c}));
    CHECK(b.start == Cell{a.rows - 1 - a.start.row, a.cols - 1 - a.start.col});
    CHECK(b.goal == Cell{a.rows - 1 - a.goal.row, a.cols - 1 - a.goal.col});
  }
}

TEST_CASE("map generation is pure and rejects bad specs") {
  MapSpec s;
  s.length = 9;
  CHECK(generate_map(s) == generate_map(s));
  MapSpec bad = s;
  bad.orientation = 45;
  CHECK_THROWS_AS(generate_map(bad), InfeasibleSpec);
  bad = s;
  bad.length = 0;
  CHECK_THROWS_AS(generate_map(bad), InfeasibleSpec);
  bad = s;
  bad.row_disp = 1.0;  // two cells off a three-cell corridor lands in the wall
  CHECK_THROWS_AS(generate_map(bad), InfeasibleSpec);
  bad = s;
  bad.step = 0.75;
  CHECK_THROWS_AS(generate_map(bad), InfeasibleSpec);
}

TEST_CASE("goal lies beyond the obstacle and start is free on every built-in suite") {
  for (const std::string name : {"small", "large", "desk"}) {
    const Preset p = preset_by_name(name);
    for (auto k : {SuiteKind::Train, SuiteKind::Interp, SuiteKind::Extrap}) {
      for (const MapSpec& s : builtin_suite(p, k, 3, 40)) {
        const GridMap m = generate_map(s, p.layout);
        CHECK_FALSE(m.occupied(m.start));
        for (const Cell& g : m.goal_region()) CHECK_FALSE(m.occupied(g));
        // Along the start-to-goal axis the goal lies past every obstacle cell
        // and the start is not past any of them beyond its column displacement.
        const int dr = (m.goal.row > m.start.row) - (m.goal.row < m.start.row);
        const int dc = (m.goal.col > m.start.col) - (m.goal.col < m.start.col);
        CHECK(std::abs(dr) + std::abs(dc) == 1);
        int lo = INT_MAX, hi = INT_MIN;
        for (int r = 0; r < m.rows; ++r)
          for (int c = 0; c < m.cols; ++c)
            if (m.occupied({r, c})) {
              lo = std::min(lo, r * dr + c * dc);
              hi = std::max(hi, r * dr + c * dc);
            }
        CHECK(m.goal.row * dr + m.goal.col * dc > hi);
        const int shift = std::max(0, static_cast<int>(std::lround(s.col_disp / s.resolution)));
        CHECK(m.start.row * dr + m.start.col * dc <= lo + 1 + shift);
      }
    }
  }
}

TEST_CASE("sample_spec covers the grid and is deterministic") {
  ParamGrid g;
  for (int l = 2; l <= 20; l += 2) g.lengths.push_back(l);
  std::mt19937_64 rng(7);
  std::set<double> seen;
  for (int i = 0; i < 10000; ++i) {
    const MapSpec s = sample_spec(g, rng);
    CHECK(std::find(g.lengths.begin(), g.lengths.end(), s.length) != g.lengths.end());
    seen.insert(s.length);
  }
  CHECK(seen.size() == g.lengths.size());

  ParamGrid one;
  one.kinds = {ObstacleKind::ParallelWalls};
  one.lengths = {5};
  one.widths = {2};
  one.orientations = {90};
  one.row_disps = {0.5};
  one.col_disps = {-0.5};
  std::mt19937_64 r1(1);
  const MapSpec u = sample_spec(one, r1);
  CHECK(u.kind == ObstacleKind::ParallelWalls);
  CHECK(u.length == 5);
  CHECK(u.orientation == 90);
  CHECK(u.row_disp == 0.5);

  std::mt19937_64 a(11), b(11);
  for (int i = 0; i < 100; ++i) CHECK(sample_spec(g, a) == sample_spec(g, b));

  ParamGrid empty = g;
  empty.widths.clear();
  CHECK_THROWS(sample_spec(empty, a));
}

TEST_CASE("step moves, reaches the goal and collides") {
  GridMap m = empty_map(10, 10, 1.0);
  SensorConfig cfg;
  cfg.step_size = 1.0;
  StepOutcome o = step(m, {0.5, 0.5}, Action::Right, cfg);
  CHECK(o.next_state == RobotState{1.5, 0.5});
  CHECK(o.reward == 0);
  CHECK(o.terminal == Terminal::None);

  m.goal = {0, 2};
  o = step(m, {1.5, 0.5}, Action::Right, cfg);
  CHECK(o.terminal == Terminal::Goal);
  CHECK(o.reward == 1);

  set_cell(m, 1, 1);
  o = step(m, {1.5, 0.5}, Action::Up, cfg);
  CHECK(o.terminal == Terminal::Collision);
  CHECK(o.reward == -1);
  CHECK(o.next_state == RobotState{1.5, 0.5});

  o = step(m, {0.5, 0.5}, Action::Down, cfg);
  CHECK(o.terminal == Terminal::Collision);
}

TEST_CASE("a two-cell step collides when either swept cell is occupied") {
  GridMap m = empty_map(8, 8, 0.5);
  SensorConfig cfg;
  cfg.step_size = 1.0;
  set_cell(m, 2, 3);
  const RobotState s = cell_center({2, 1}, 0.5);
  CHECK(step(m, s, Action::Right, cfg).terminal == Terminal::Collision);
  set_cell(m, 2, 3);
  m.occupancy[2 * 8 + 3] = 0;
  set_cell(m, 2, 2);
  CHECK(step(m, s, Action::Right, cfg).terminal == Terminal::Collision);
}

TEST_CASE("step is reversible and rewards match terminals") {
  const Preset p = preset_by_name("small");
  std::mt19937_64 rng(5);
  for (const MapSpec& s : builtin_suite(p, SuiteKind::Train, 9, 20)) {
    const GridMap m = generate_map(s, p.layout);
    for (int trial = 0; trial < 50; ++trial) {
      std::uniform_int_distribution<int> rr(0, m.rows - 1), cc(0, m.cols - 1);
      const Cell c{rr(rng), cc(rng)};
      if (m.occupied(c)) continue;
      const RobotState st = cell_center(c, m.resolution());
      for (Action a : kAllActions) {
        const StepOutcome o = step(m, st, a, p.sensor);
        CHECK((o.reward == 1) == (o.terminal == Terminal::Goal));
        CHECK((o.reward == -1) == (o.terminal == Terminal::Collision));
        CHECK((o.reward == 0) == (o.terminal == Terminal::None));
        if (o.terminal == Terminal::None) {
          const StepOutcome back = step(m, o.next_state, opposite(a), p.sensor);
          if (back.terminal != Terminal::Collision) CHECK(back.next_state == st);
        }
      }
    }
  }
}

TEST_CASE("sense in a square room reads the half-width on the axes") {
  // Interior cells 1..4 at 0.5 m, so the room spans [0.5, 2.5] on both axes.
  GridMap m = empty_map(6, 6, 0.5);
  for (int i = 0; i < 6; ++i) {
    set_cell(m, 0, i);
    set_cell(m, 5, i);
    set_cell(m, i, 0);
    set_cell(m, i, 5);
  }
  SensorConfig cfg;
  cfg.n_beams = 4;
  cfg.z_max = 5;
  const Observation o = sense(m, {1.5, 1.5}, Action::Right, cfg);
  REQUIRE(o.ranges.size() == 4);
  for (double r : o.ranges) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
  for (int k = 0; k < 4; ++k)
    CHECK(o.ranges[k] == doctest::Approx(oracle::slab_range(m, 1.5, 1.5, beam_angle(cfg, k), 5)));
}

TEST_CASE("sense clamps to z_max with nothing in range") {
  GridMap m = empty_map(60, 60, 0.5);
  SensorConfig cfg;
  cfg.n_beams = 144;
  cfg.z_max = 5;
  const Observation o = sense(m, {15, 15}, Action::Right, cfg);
  for (double r : o.ranges) CHECK(r == cfg.z_max);
}

TEST_CASE("ranges always lie in [z_min, z_max]") {
  const Preset p = preset_by_name("small");
  std::mt19937_64 rng(3);
  SensorConfig cfg = p.sensor;
  cfg.z_min = 0.3;
  for (const MapSpec& s : builtin_suite(p, SuiteKind::Train, 4, 20)) {
    const GridMap m = generate_map(s, p.layout);
    std::uniform_real_distribution<double> ux(0, m.cols * m.resolution()), uy(0, m.rows * m.resolution());
    for (int t = 0; t < 20; ++t) {
      const RobotState st{ux(rng), uy(rng)};
      if (m.occupied(cell_of(st, m.resolution()))) continue;
      for (double r : sense(m, st, Action::Up, cfg).ranges) {
        CHECK(r >= cfg.z_min);
        CHECK(r <= cfg.z_max);
        CHECK(std::isfinite(r));
      }
    }
  }
}

TEST_CASE("mirroring the map reverses the range vector") {
  MapSpec s;
  s.length = 6;
  s.orientation = 90;
  const GridMap m = generate_map(s);
  GridMap mir = m;
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c)
      mir.occupancy[static_cast<std::size_t>(r) * m.cols + c] =
          m.occupancy[static_cast<std::size_t>(r) * m.cols + (m.cols - 1 - c)];
  SensorConfig cfg;
  const int n = cfg.n_beams;
  const double W = m.cols * m.resolution();
  for (int r = 0; r < m.rows; r += 3)
    for (int c = 0; c < m.cols; c += 3) {
      if (m.occupied({r, c})) continue;
      const RobotState st = cell_center({r, c}, m.resolution());
      const Observation a = sense(m, st, Action::Up, cfg);
      const Observation b = sense(mir, {W - st.x, st.y}, Action::Up, cfg);
      for (int k = 0; k < n; ++k)
        CHECK(a.ranges[k] == doctest::Approx(b.ranges[((n / 2 - k) % n + n) % n]).epsilon(1e-9));
    }
}

TEST_CASE("blind rear reports z_max behind the heading") {
  GridMap m = empty_map(20, 20, 0.5);
  for (int i = 0; i < 20; ++i) set_cell(m, i, 4);  // wall to the left
  SensorConfig cfg;
  cfg.n_beams = 8;
  cfg.blind_rear = true;
  const RobotState st = cell_center({10, 6}, 0.5);
  const Observation o = sense(m, st, Action::Right, cfg);
  CHECK(o.ranges[4] == cfg.z_max);  // 180 degrees
  CHECK(o.blinded[4] == 1);
  CHECK(o.blinded[0] == 0);
  cfg.blind_rear = false;
  CHECK(sense(m, st, Action::Right, cfg).ranges[4] == doctest::Approx(0.75));
}

TEST_CASE("goal term is the heading or the scaled displacement") {
  MapSpec s;
  s.length = 4;
  const GridMap m = generate_map(s);
  SensorConfig cfg;
  const RobotState st = start_state(m);
  const RobotState g = goal_position(m);
  Observation o = sense(m, st, Action::Right, cfg);
  REQUIRE(o.goal_term.size() == 1);
  CHECK(o.goal_term[0] == doctest::Approx(std::atan2(st.y - g.y, st.x - g.x)));
  cfg.goal_term = GoalTerm::Displacement;
  o = sense(m, st, Action::Right, cfg);
  REQUIRE(o.goal_term.size() == 2);
  CHECK(o.goal_term[0] == doctest::Approx((st.x - g.x) / cfg.displacement_scale));
  CHECK(o.goal_term[1] == doctest::Approx(0.0));
}

TEST_CASE("sensor config validation") {
  SensorConfig c;
  CHECK_NOTHROW(c.validate());
  c.z_min = 6;
  CHECK_THROWS(c.validate());
  c = {};
  c.n_beams = 0;
  CHECK_THROWS(c.validate());
  c = {};
  c.fov = 0;
  CHECK_THROWS(c.validate());
}
