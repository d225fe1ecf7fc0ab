#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "memnav/dagger.hpp"
#include "memnav/errors.hpp"
#include "memnav/eval.hpp"
#include "memnav/expert.hpp"
#include "memnav/gridworld.hpp"
#include "memnav/map_io.hpp"
#include "memnav/nn/checkpoint.hpp"
#include "memnav/policy.hpp"
#include "memnav/presets.hpp"
#include "memnav/vcdim/features.hpp"
#include "memnav/vcdim/meb.hpp"
#include "memnav/vcdim/report.hpp"
#include "memnav/vcdim/svm.hpp"

namespace py = pybind11;
using namespace memnav;

namespace {

std::vector<MapSpec> suite_specs(const std::string& name, std::uint64_t seed, int count) {
  const auto s = parse_builtin_suite(name);
  if (!s) throw std::invalid_argument("unknown suite '" + name + "'");
  return builtin_suite(preset_by_name(s->preset), s->kind, seed, count);
}

Preset checkpoint_preset(const nn::Checkpoint& ck, InputOptions& input) {
  auto it = ck.meta.find("preset");
  auto pa = ck.meta.find("prev_action");
  input.prev_action = pa != ck.meta.end() && pa->second == "1";
  return preset_by_name(it != ck.meta.end() ? it->second : "small");
}

std::string model_name(const nn::Checkpoint& ck) {
  auto it = ck.meta.find("model");
  return it != ck.meta.end() ? it->second : std::string(nn::to_string(ck.arch.kind));
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["episodes"] = m.episodes;
  d["success_rate"] = m.success_rate;
  d["class_acc"] = m.class_acc;
  d["astar_ratio"] = m.astar_ratio;
  return d;
}

py::dict report_dict(const SuiteReport& r) {
  py::dict d;
  d["model"] = r.model;
  d["suite"] = r.suite;
  d["overall"] = metrics_dict(r.overall);
  py::dict kinds;
  for (const auto& [k, m] : r.per_kind) kinds[to_string(k)] = metrics_dict(m);
  d["per_kind"] = kinds;
  d["results_csv"] = results_csv(r);
  d["curves_csv"] = curves_csv(r);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Grid-world navigation with memory-augmented policies";

  py::register_exception<InfeasibleSpec>(m, "InfeasibleSpec", PyExc_ValueError);
  py::register_exception<NoPath>(m, "NoPath", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_OSError);

  py::enum_<ObstacleKind>(m, "ObstacleKind")
      .value("CulDeSac", ObstacleKind::CulDeSac)
      .value("ParallelWalls", ObstacleKind::ParallelWalls);
  py::enum_<Action>(m, "Action")
      .value("Down", Action::Down)
      .value("Right", Action::Right)
      .value("Up", Action::Up)
      .value("Left", Action::Left);

  py::class_<MapSpec>(m, "MapSpec")
      .def(py::init<>())
      .def(py::init([](ObstacleKind kind, double length, double width, int orientation, double row_disp,
                       double col_disp, double resolution, double step) {
             return MapSpec{kind, length, width, orientation, row_disp, col_disp, resolution, step};
           }),
           py::arg("kind") = ObstacleKind::CulDeSac, py::arg("length") = 10.0, py::arg("width") = 1.5,
           py::arg("orientation") = 0, py::arg("row_disp") = 0.0, py::arg("col_disp") = 0.0,
           py::arg("resolution") = 0.5, py::arg("step") = 1.0)
      .def_readwrite("kind", &MapSpec::kind)
      .def_readwrite("length", &MapSpec::length)
      .def_readwrite("width", &MapSpec::width)
      .def_readwrite("orientation", &MapSpec::orientation)
      .def_readwrite("row_disp", &MapSpec::row_disp)
      .def_readwrite("col_disp", &MapSpec::col_disp)
      .def_readwrite("resolution", &MapSpec::resolution)
      .def_readwrite("step", &MapSpec::step)
      .def("__eq__", [](const MapSpec& a, const MapSpec& b) { return a == b; })
      .def("__repr__", [](const MapSpec& s) { return "MapSpec(" + format_spec(s) + ")"; });

  py::class_<GridMap>(m, "GridMap")
      .def_readonly("rows", &GridMap::rows)
      .def_readonly("cols", &GridMap::cols)
      .def_readonly("spec", &GridMap::spec)
      .def_property_readonly("start", [](const GridMap& g) { return py::make_tuple(g.start.row, g.start.col); })
      .def_property_readonly("goal", [](const GridMap& g) { return py::make_tuple(g.goal.row, g.goal.col); })
      .def_property_readonly("occupancy",
                             [](const GridMap& g) {
                               py::array_t<std::uint8_t> a({g.rows, g.cols});
                               std::copy(g.occupancy.begin(), g.occupancy.end(), a.mutable_data());
                               return a;
                             })
      .def("to_text", [](const GridMap& g) { return write_map(g); })
      .def("__eq__", [](const GridMap& a, const GridMap& b) { return a == b; });

  py::class_<SensorConfig>(m, "SensorConfig")
      .def(py::init<>())
      .def_readwrite("n_beams", &SensorConfig::n_beams)
      .def_readwrite("z_min", &SensorConfig::z_min)
      .def_readwrite("z_max", &SensorConfig::z_max)
      .def_readwrite("fov", &SensorConfig::fov)
      .def_readwrite("step_size", &SensorConfig::step_size)
      .def_readwrite("blind_rear", &SensorConfig::blind_rear);

  m.def("preset_names", &preset_names);
  m.def("preset_sensor", [](const std::string& name) { return preset_by_name(name).sensor; }, py::arg("preset"));

  m.def("generate_map", [](const MapSpec& s) { return generate_map(s); }, py::arg("spec"));
  m.def("parse_map", &parse_map, py::arg("text"));
  m.def("builtin_suite", &suite_specs, py::arg("name"), py::arg("seed") = 1, py::arg("count") = -1);

  m.def(
      "sense",
      [](const GridMap& map, double x, double y, Action heading, const SensorConfig& cfg) {
        const Observation o = sense(map, RobotState{x, y}, heading, cfg);
        const Eigen::VectorXd ranges =
            Eigen::Map<const Eigen::VectorXd>(o.ranges.data(), static_cast<Eigen::Index>(o.ranges.size()));
        return py::make_tuple(ranges, o.goal_term);
      },
      py::arg("map"), py::arg("x"), py::arg("y"), py::arg("heading"), py::arg("sensor"),
      "Returns (ranges, goal_term).");
  m.def("start_position", [](const GridMap& g) {
    const RobotState s = start_state(g);
    return py::make_tuple(s.x, s.y);
  });

  m.def(
      "plan",
      [](const GridMap& map) {
        const PlanResult r = full_knowledge_plan(map);
        std::vector<std::pair<int, int>> path;
        for (const Cell& c : r.path) path.emplace_back(c.row, c.col);
        py::dict d;
        d["cost"] = r.cost;
        d["expanded"] = r.expanded;
        d["path"] = path;
        return d;
      },
      py::arg("map"));
  m.def("map_difficulty", &map_difficulty, py::arg("map"));
  m.def(
      "expert_rollout",
      [](const GridMap& map, const SensorConfig& cfg, int cap) {
        const ExpertRollout r = expert_rollout(map, cfg, cap);
        std::vector<Action> acts = r.actions;
        py::dict d;
        d["actions"] = acts;
        d["steps"] = r.steps();
        d["reached_goal"] = r.terminal == Terminal::Goal;
        return d;
      },
      py::arg("map"), py::arg("sensor"), py::arg("step_cap") = 100000);

  m.def(
      "train",
      [](const std::string& preset, const std::string& arch, double lam, long updates, int learners,
         std::uint64_t seed, double lr, const std::string& out) {
        const Preset p = preset_by_name(preset);
        const nn::ArchSpec spec = make_arch(p, nn::parse_arch_kind(arch), lam);
        const nn::Network net(spec);
        std::mt19937_64 rng(seed);
        const nn::Vec theta = net.init_params(rng);
        TrainEnv env;
        env.grid = p.train;
        env.layout = p.layout;
        env.sensor = p.sensor;
        TrainOptions opt;
        opt.learner.J_max = updates;
        opt.learner.n_learners = learners;
        opt.learner.t_max = p.t_max;
        opt.learner.j_max = p.window;
        opt.seed = seed;
        nn::RmsPropConfig cfg = p.optimizer;
        if (lr > 0) cfg.lr = lr;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(net, theta, nn::rmsprop_init(net.num_params()), 0, cfg, env, opt);
        }
        if (!out.empty()) {
          nn::Checkpoint ck;
          ck.arch = spec;
          ck.theta = r.theta;
          ck.optimizer = cfg;
          ck.optimizer_state = r.optimizer_state;
          ck.updates = r.updates;
          ck.seed = seed;
          ck.meta["preset"] = p.name;
          ck.meta["prev_action"] = "0";
          ck.meta["model"] = arch + (lam > 0 ? "-l2" : "");
          nn::save_checkpoint(ck, out);
        }
        py::dict d;
        d["theta"] = r.theta;
        d["updates"] = r.updates;
        d["wall_seconds"] = r.wall_seconds;
        d["tail_loss"] = tail_loss(*r.log);
        d["log_csv"] = r.log->csv();
        return d;
      },
      py::arg("preset") = "desk", py::arg("arch") = "lstm", py::arg("lam") = 0.0, py::arg("updates") = 1000,
      py::arg("learners") = 1, py::arg("seed") = 1, py::arg("lr") = 0.0, py::arg("out") = "",
      "Trains a policy; writes a checkpoint when `out` is given.");

  m.def(
      "evaluate",
      [](const std::string& policy, const std::string& suite, int cap, std::uint64_t seed, int count,
         int workers) {
        const auto sn = parse_builtin_suite(suite);
        if (!sn) throw std::invalid_argument("unknown suite '" + suite + "'");
        Preset p = preset_by_name(sn->preset);
        InputOptions input;
        PolicyFactory factory;
        std::string model = policy;
        if (policy == "expert") {
          factory = [&] { return std::make_unique<ExpertPolicy>(p.sensor); };
        } else if (policy == "turn-at-end" || policy == "turn-at-halfway") {
          const double f = policy == "turn-at-end" ? 1.0 : 0.5;
          factory = [f] { return std::make_unique<ScriptedTurnPolicy>(f); };
        } else {
          const nn::Checkpoint ck = nn::load_checkpoint(policy);
          p = checkpoint_preset(ck, input);
          auto net = std::make_shared<const nn::Network>(ck.arch);
          model = model_name(ck);
          factory = [net, theta = ck.theta, cfg = p.sensor, input, model] {
            return std::make_unique<NetworkPolicy>(net, theta, cfg, input, model);
          };
        }
        EvalOptions opt;
        opt.step_cap = cap >= 0 ? cap : default_cap(p, sn->kind);
        opt.workers = workers;
        const auto specs = builtin_suite(preset_by_name(sn->preset), sn->kind, seed, count);
        SuiteReport r;
        {
          py::gil_scoped_release release;
          r = evaluate_suite(factory, specs, p.layout, p.sensor, opt, model, suite);
        }
        return report_dict(r);
      },
      py::arg("policy"), py::arg("suite"), py::arg("cap") = -1, py::arg("seed") = 1, py::arg("count") = -1,
      py::arg("workers") = 1,
      "policy is 'expert', 'turn-at-end', 'turn-at-halfway' or a checkpoint path.");

  m.def(
      "min_enclosing_ball",
      [](const Eigen::MatrixXd& X) {
        const vcdim::BallResult b = vcdim::min_enclosing_ball(X);
        py::dict d;
        d["center"] = b.center;
        d["radius"] = b.radius;
        d["dual_value"] = b.dual_value;
        d["weights"] = b.p_star;
        return d;
      },
      py::arg("points"));

  m.def(
      "train_svm",
      [](const Eigen::MatrixXd& X, const std::vector<int>& y, double C) {
        vcdim::SvmOptions opt;
        opt.C = C;
        const vcdim::SvmModel s = vcdim::train_svm(X, y, opt);
        py::dict d;
        d["w"] = s.w;
        d["b"] = s.b;
        d["alpha"] = s.alpha;
        d["margin"] = s.margin;
        d["training_error"] = s.training_error;
        d["primal"] = s.primal;
        d["dual"] = s.dual;
        d["support"] = s.support_indices;
        return d;
      },
      py::arg("X"), py::arg("y"), py::arg("C") = 1.0);

  m.def(
      "collect_features",
      [](const std::string& checkpoint, int episodes, std::uint64_t seed) {
        const nn::Checkpoint ck = nn::load_checkpoint(checkpoint);
        InputOptions input;
        const Preset p = checkpoint_preset(ck, input);
        std::mt19937_64 rng(seed);
        std::vector<GridMap> maps;
        for (int i = 0; i < episodes; ++i) maps.push_back(generate_map(sample_spec(p.train, rng), p.layout));
        const nn::Network net(ck.arch);
        const vcdim::FeatureSet fs = vcdim::collect_features(net, ck.theta, maps, p.sensor, input, p.extrap_cap);
        return py::make_tuple(fs.psi, fs.labels, fs.episode);
      },
      py::arg("checkpoint"), py::arg("episodes") = 100, py::arg("seed") = 1,
      "Returns (psi, labels, episode) recorded along expert rollouts on training maps.");

  m.def(
      "vc_estimate",
      [](const Eigen::MatrixXd& psi, const std::vector<int>& labels, double C) {
        vcdim::FeatureSet fs;
        fs.psi = psi;
        fs.labels = labels;
        if (static_cast<Eigen::Index>(labels.size()) != psi.rows())
          throw std::invalid_argument("labels and psi rows differ");
        vcdim::VcEstimate e;
        {
          py::gil_scoped_release release;
          e = vcdim::vc_estimate(fs, "py", C);
        }
        py::list out;
        for (const vcdim::VcClassRecord& r : e.classes) {
          py::dict d;
          d["class"] = to_string(static_cast<Action>(r.cls));
          d["eta_est"] = r.eta_est;
          d["margin"] = r.margin;
          d["radius"] = r.radius;
          d["n_support"] = r.n_support;
          d["training_error"] = r.training_error;
          out.append(d);
        }
        return out;
      },
      py::arg("psi"), py::arg("labels"), py::arg("C") = 1.0);
}
