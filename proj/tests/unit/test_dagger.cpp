#include <algorithm>
#include <cmath>
#include <thread>

#include "doctest.h"
#include "memnav/dagger.hpp"
#include "memnav/errors.hpp"
#include "memnav/expert.hpp"

using namespace memnav;
using namespace memnav::nn;

namespace {

TrainEnv corridor_env() {
  TrainEnv env;
  env.grid.kinds = {ObstacleKind::ParallelWalls};
  env.grid.lengths = {4};
  env.grid.orientations = {0};
  env.sensor.n_beams = 16;
  return env;
}

TrainEnv mixed_env() {
  TrainEnv env;
  env.grid.lengths = {2, 4, 6};
  env.sensor.n_beams = 16;
  return env;
}

ArchSpec small_arch(const TrainEnv& env, ArchKind kind = ArchKind::FF) {
  ArchSpec a;
  a.kind = kind;
  a.input_dim = input_dim(env.sensor, env.input);
  a.range_dim = env.sensor.n_beams;
  a.hidden_sizes = {16};
  return a;
}

TrainOptions options(long J_max, int learners = 1, std::uint64_t seed = 1) {
  TrainOptions o;
  o.learner.J_max = J_max;
  o.learner.n_learners = learners;
  o.learner.t_max = 60;
  o.seed = seed;
  return o;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("learner config validation") {
  LearnerConfig c;
  CHECK_NOTHROW(c.validate());
  c.j_max = 0;
  CHECK_THROWS(c.validate());
  c.j_max = 6;
  CHECK_THROWS(c.validate());
  c = {};
  c.n_learners = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("a single-action environment is learned") {
  const TrainEnv env = corridor_env();
  const Network net(small_arch(env));
  std::mt19937_64 rng(1);
  const Vec th0 = net.init_params(rng);
  const TrainResult r = train(net, th0, rmsprop_init(net.num_params()), 0, {}, env, options(2000));
  CHECK(r.updates == 2000);
  CHECK(tail_loss(*r.log, 0.05) < 0.05);

  const GridMap m = generate_map(sample_spec(env.grid, rng), env.layout);
  Expert ex(m, env.sensor);
  RobotState s = start_state(m);
  MemoryState mem = net.initial_state();
  int agree = 0, steps = 0;
  Action heading = initial_heading(m);
  for (int t = 0; t < 40; ++t) {
    const Observation o = sense(m, s, heading, env.sensor);
    const Action label = ex.observe_and_act(s, o);
    const PolicyOutput out = net.forward(r.theta, encode_input(o, env.sensor, env.input, {}), mem);
    agree += out.chosen == label;
    ++steps;
    const StepOutcome so = step(m, s, label, env.sensor);
    if (so.terminal != Terminal::None) break;
    s = so.next_state;
    heading = label;
  }
  CHECK(agree >= 0.99 * steps);
}

TEST_CASE("zero budget leaves parameters unchanged") {
  const TrainEnv env = corridor_env();
  const Network net(small_arch(env));
  std::mt19937_64 rng(1);
  const Vec th0 = net.init_params(rng);
  const TrainResult r = train(net, th0, rmsprop_init(net.num_params()), 0, {}, env, options(0, 2));
  CHECK(r.theta == th0);
  CHECK(r.updates == 0);
  CHECK(r.log->size() == 0);
}

TEST_CASE("single-learner training is deterministic") {
  const TrainEnv env = mixed_env();
  const Network net(small_arch(env, ArchKind::LSTM));
  std::mt19937_64 rng(4);
  const Vec th0 = net.init_params(rng);
  const TrainResult a = train(net, th0, rmsprop_init(net.num_params()), 0, {}, env, options(300));
  const TrainResult b = train(net, th0, rmsprop_init(net.num_params()), 0, {}, env, options(300));
  CHECK(a.theta == b.theta);
  CHECK(a.optimizer_state == b.optimizer_state);
  const TrainResult c = train(net, th0, rmsprop_init(net.num_params()), 0, {}, env, options(300, 1, 2));
  CHECK(a.theta != c.theta);
}

TEST_CASE("resuming from a checkpoint retraces the uninterrupted run") {
  const TrainEnv env = mixed_env();
  const Network net(small_arch(env, ArchKind::LSTM));
  std::mt19937_64 rng(6);
  const Vec th0 = net.init_params(rng);

  TrainOptions full = options(300);
  full.checkpoint_every = 100;
  Vec mid_theta;
  RmsPropState mid_state;
  full.on_checkpoint = [&](const Vec& th, const RmsPropState& st, long J) {
    if (J == 200) {
      mid_theta = th;
      mid_state = st;
    }
  };
  Vec grad_full;
  full.observer = [&](long J, const Vec& g) {
    if (J == 201) grad_full = g;
  };
  const TrainResult a = train(net, th0, rmsprop_init(net.num_params()), 0, {}, env, full);
  REQUIRE(mid_theta.size() > 0);

  TrainOptions rest = options(300);
  rest.checkpoint_every = 100;
  Vec grad_rest;
  rest.observer = [&](long J, const Vec& g) {
    if (J == 201) grad_rest = g;
  };
  const TrainResult b = train(net, mid_theta, mid_state, 200, {}, env, rest);
  CHECK(grad_rest == grad_full);
  CHECK(b.theta == a.theta);
  CHECK(b.updates == 300);
}

TEST_CASE("global J is exact with several learners") {
  const TrainEnv env = mixed_env();
  const Network net(small_arch(env));
  std::mt19937_64 rng(2);
  const TrainResult r = train(net, net.init_params(rng), rmsprop_init(net.num_params()), 0, {}, env,
                              options(500, 4));
  CHECK(r.updates == 500);
  long applied = 0;
  for (const LogRow& row : r.log->rows()) applied += row.episode_result != "discarded";
  CHECK(applied == 500);
  CHECK(r.optimizer_state.steps == 500);
  CHECK(r.theta.allFinite());
}

TEST_CASE("concurrent applies are serialized") {
  const Vec th = Vec::Zero(4);
  RmsPropConfig cfg;
  SharedParams sp(th, cfg, rmsprop_init(4), 0, 10);
  const Vec g1 = Vec::Constant(4, 1.0), g2 = Vec::Constant(4, 3.0);
  std::thread t1([&] { apply_async(sp, g1); });
  std::thread t2([&] { apply_async(sp, g2); });
  t1.join();
  t2.join();
  CHECK(sp.updates() == 2);
  auto order = [&](const Vec& a, const Vec& b) {
    RmsPropState s = rmsprop_init(4);
    Vec x = th;
    rmsprop_update(s, x, a, cfg);
    rmsprop_update(s, x, b, cfg);
    return std::make_pair(x, s.mean_square);
  };
  const auto ab = order(g1, g2), ba = order(g2, g1);
  const Vec got = *sp.snapshot();
  const Vec ms = sp.optimizer_state().mean_square;
  CHECK(((got == ab.first && ms == ab.second) || (got == ba.first && ms == ba.second)));
}

TEST_CASE("non-finite gradients are rejected") {
  SharedParams sp(Vec::Zero(3), {}, rmsprop_init(3), 5, 10);
  Vec g = Vec::Ones(3);
  g[1] = std::nan("");
  long J = -1;
  CHECK(sp.apply(g, &J) == ApplyStatus::NonFinite);
  CHECK(sp.updates() == 5);
  CHECK(sp.rejected() == 1);
  CHECK(sp.snapshot()->isZero());
  g[1] = INFINITY;
  CHECK(sp.apply(g) == ApplyStatus::NonFinite);
  CHECK(sp.apply(Vec::Ones(3), &J) == ApplyStatus::Applied);
  CHECK(J == 6);
  SharedParams full(Vec::Zero(3), {}, rmsprop_init(3), 10, 10);
  CHECK(full.apply(Vec::Ones(3)) == ApplyStatus::BudgetExhausted);
  CHECK(full.done());
}

TEST_CASE("executed actions come from the learner policy") {
  // A zero network always picks Down under argmax; the expert would never send
  // the robot that way in a corridor pointing Right, so episodes end in collisions
  // even though every label is Right.
  const TrainEnv env = corridor_env();
  const Network net(small_arch(env));
  const Vec zero = Vec::Zero(static_cast<Eigen::Index>(net.num_params()));
  TrainOptions o = options(40);
  o.learner.action_selection = ActionSelection::Argmax;
  RmsPropConfig frozen;
  frozen.lr = 0.0;
  const TrainResult r = train(net, zero, rmsprop_init(net.num_params()), 0, frozen, env, o);
  int collisions = 0, goals = 0;
  for (const LogRow& row : r.log->rows()) {
    collisions += row.episode_result == "collision";
    goals += row.episode_result == "goal";
  }
  CHECK(collisions > 0);
  CHECK(goals == 0);
}

TEST_CASE("training lowers the window loss") {
  const TrainEnv env = mixed_env();
  const Network net(small_arch(env, ArchKind::LSTM));
  std::mt19937_64 rng(3);
  TrainOptions o = options(3000, 2);
  RmsPropConfig cfg;
  cfg.lr = 1e-3;
  const TrainResult r = train(net, net.init_params(rng), rmsprop_init(net.num_params()), 0, cfg, env, o);
  std::vector<double> losses;
  for (const LogRow& row : r.log->rows())
    if (std::isfinite(row.loss)) losses.push_back(row.loss);
  REQUIRE(losses.size() > 100);
  const std::size_t d = losses.size() / 10;
  const double first = median({losses.begin(), losses.begin() + static_cast<std::ptrdiff_t>(d)});
  const double last = median({losses.end() - static_cast<std::ptrdiff_t>(d), losses.end()});
  CHECK(last < first);
}

TEST_CASE("training log csv columns") {
  TrainingLog log;
  log.add({2, 1.5, 0.25, "goal", ObstacleKind::CulDeSac, 6, 0});
  log.add({1, 1.0, 0.5, "running", ObstacleKind::ParallelWalls, 4, 1});
  const std::string csv = log.csv();
  CHECK(csv.rfind("J,wall_ms,loss,episode_result,map_kind,map_length\n", 0) == 0);
  CHECK(csv.find("1,1,0.5,running,walls,4\n") < csv.find("2,1.5,0.25,goal,culdesac,6\n"));
}

TEST_CASE("mismatched theta is rejected") {
  const TrainEnv env = corridor_env();
  const Network net(small_arch(env));
  CHECK_THROWS_AS(train(net, Vec::Zero(3), rmsprop_init(3), 0, {}, env, options(5)), ShapeMismatch);
}
