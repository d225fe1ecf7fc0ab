// memnav: map generation, training, evaluation, VC estimation and map
// difficulty from the command line.
//
// Exit codes: 0 success, 1 usage, 2 infeasible or unreadable input, 3 internal.

#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "memnav/dagger.hpp"
#include "memnav/errors.hpp"
#include "memnav/eval.hpp"
#include "memnav/expert.hpp"
#include "memnav/map_io.hpp"
#include "memnav/nn/checkpoint.hpp"
#include "memnav/nn/network.hpp"
#include "memnav/policy.hpp"
#include "memnav/presets.hpp"
#include "memnav/vcdim/features.hpp"
#include "memnav/vcdim/pca.hpp"
#include "memnav/vcdim/report.hpp"

namespace fs = std::filesystem;
using namespace memnav;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Values from a key=value file fill options not given on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
  if (path.empty()) return;
  for (const auto& [key, value] : parse_key_values(read_text_file(path))) {
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw UsageError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_real(item));
  return out;
}

struct Suite {
  std::vector<MapSpec> specs;
  std::string name;
  SuiteKind kind = SuiteKind::Interp;
};

// A built-in name such as interp-small, a manifest path, or a directory with manifest.txt.
Suite load_suite(const std::string& suite, std::uint64_t seed, int count) {
  Suite s;
  if (auto b = parse_builtin_suite(suite)) {
    s.specs = builtin_suite(preset_by_name(b->preset), b->kind, seed, count);
    s.name = suite;
    s.kind = b->kind;
    return s;
  }
  fs::path p(suite);
  if (fs::is_directory(p)) p /= "manifest.txt";
  if (!fs::exists(p)) throw InputError("suite '" + suite + "' is neither built in nor a readable manifest");
  s.specs = load_manifest(p.string());
  s.name = fs::path(suite).filename().string();
  if (s.name.empty() || s.name == "manifest.txt") s.name = fs::path(suite).parent_path().filename().string();
  s.kind = suite.find("extrap") != std::string::npos ? SuiteKind::Extrap : SuiteKind::Interp;
  if (count >= 0 && count < static_cast<int>(s.specs.size())) s.specs.resize(static_cast<std::size_t>(count));
  return s;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  fs::create_directories(dir);
}

std::string model_name(const nn::Checkpoint& ck) {
  auto it = ck.meta.find("model");
  return it != ck.meta.end() ? it->second : std::string(nn::to_string(ck.arch.kind));
}

Preset checkpoint_preset(const nn::Checkpoint& ck, InputOptions& input) {
  auto it = ck.meta.find("preset");
  Preset p = preset_by_name(it != ck.meta.end() ? it->second : "small");
  auto pa = ck.meta.find("prev_action");
  input.prev_action = pa != ck.meta.end() && pa->second == "1";
  return p;
}

// ---- gen-maps -------------------------------------------------------------

struct GenArgs {
  std::string suite, grid, out, preset = "small", config;
  int count = -1;
  std::uint64_t seed = 1;
};

int cmd_gen_maps(const GenArgs& a) {
  ensure_dir(a.out);
  std::vector<MapSpec> specs;
  Preset preset = preset_by_name(a.preset);
  if (!a.grid.empty()) {
    const ParamGrid g = parse_param_grid(read_text_file(a.grid), preset.train);
    std::mt19937_64 rng(a.seed);
    const int n = a.count < 0 ? preset.interp_maps : a.count;
    for (int i = 0; i < n; ++i) specs.push_back(sample_spec(g, rng));
  } else if (!a.suite.empty()) {
    auto b = parse_builtin_suite(a.suite);
    if (!b) throw UsageError("unknown built-in suite '" + a.suite + "'");
    preset = preset_by_name(b->preset);
    specs = builtin_suite(preset, b->kind, a.seed, a.count);
  } else {
    throw UsageError("gen-maps needs --suite or --grid");
  }
  fs::create_directories(fs::path(a.out) / "maps");
  std::vector<MapSpec> kept;
  for (const MapSpec& s : specs) {
    try {
      const GridMap m = generate_map(s, preset.layout);
      char name[32];
      std::snprintf(name, sizeof name, "map_%04zu.map", kept.size());
      save_map(m, (fs::path(a.out) / "maps" / name).string());
      kept.push_back(s);
    } catch (const InfeasibleSpec& e) {
      std::cerr << "warning: skipped spec '" << format_spec(s) << "': " << e.what() << '\n';
    }
  }
  save_manifest(kept, (fs::path(a.out) / "manifest.txt").string());
  std::cout << "wrote " << kept.size() << " maps to " << a.out << '\n';
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string preset = "desk", arch = "lstm", out, config, resume, lengths;
  double lambda = 0.0, lr = -1.0;
  int learners = -1, t_max = -1, window = -1;
  long updates = -1, checkpoint_every = 0;
  std::uint64_t seed = 1;
  bool prev_action = false, argmax = false;
};

int cmd_train(const TrainArgs& a) {
  ensure_dir(a.out);
  Preset p = preset_by_name(a.preset);
  InputOptions input{a.prev_action};
  nn::Checkpoint ck;
  if (!a.resume.empty()) {
    ck = nn::load_checkpoint(a.resume);
    p = checkpoint_preset(ck, input);
  } else {
    ck.arch = make_arch(p, nn::parse_arch_kind(a.arch), a.lambda, input);
    ck.seed = a.seed;
    ck.optimizer = p.optimizer;
    if (a.lr > 0) ck.optimizer.lr = a.lr;
    ck.meta["preset"] = p.name;
    ck.meta["prev_action"] = input.prev_action ? "1" : "0";
    ck.meta["model"] = a.arch + (a.lambda > 0 ? "-l2" : "");
  }
  auto net = std::make_shared<nn::Network>(ck.arch);
  if (a.resume.empty()) {
    std::mt19937_64 rng(a.seed);
    ck.theta = net->init_params(rng);
    ck.optimizer_state = nn::rmsprop_init(net->num_params());
  }
  TrainEnv env{p.train, p.layout, p.sensor, input};
  if (!a.lengths.empty()) env.grid.lengths = parse_list(a.lengths);
  if (ck.meta.count("train_lengths")) env.grid.lengths = parse_list(ck.meta["train_lengths"]);
  if (!a.lengths.empty()) ck.meta["train_lengths"] = a.lengths;

  TrainOptions opt;
  opt.seed = ck.seed;
  opt.learner.n_learners = a.learners > 0 ? a.learners : p.n_learners;
  opt.learner.J_max = a.updates >= 0 ? a.updates : p.updates;
  opt.learner.t_max = a.t_max > 0 ? a.t_max : p.t_max;
  opt.learner.j_max = a.window > 0 ? a.window : p.window;
  opt.learner.action_selection = a.argmax ? ActionSelection::Argmax : ActionSelection::Sample;
  opt.checkpoint_every = a.checkpoint_every;
  opt.on_checkpoint = [&](const nn::Vec& theta, const nn::RmsPropState& st, long J) {
    nn::Checkpoint c = ck;
    c.theta = theta;
    c.optimizer_state = st;
    c.updates = J;
    nn::save_checkpoint(c, (fs::path(a.out) / ("checkpoint_" + std::to_string(J) + ".json")).string());
  };
  TrainResult res = train(*net, ck.theta, ck.optimizer_state, ck.updates, ck.optimizer, env, opt);
  ck.theta = res.theta;
  ck.optimizer_state = res.optimizer_state;
  ck.updates = res.updates;
  nn::save_checkpoint(ck, (fs::path(a.out) / "checkpoint.json").string());
  write_text_file((fs::path(a.out) / "training_log.csv").string(), res.log->csv());
  std::cout << "model " << model_name(ck) << " updates " << res.updates << " wall_s "
            << format_real(res.wall_seconds) << " tail_loss " << format_real(tail_loss(*res.log))
            << '\n';
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, policy, preset = "small", suite, out, model, config;
  int cap = -1, workers = 1, count = -1;
  std::uint64_t seed = 1;
  bool full_map = false;
};

int cmd_eval(const EvalArgs& a) {
  if (a.suite.empty()) throw UsageError("eval needs --suite");
  if (a.checkpoint.empty() == a.policy.empty()) throw UsageError("eval needs exactly one of --checkpoint and --policy");
  ensure_dir(a.out);
  Preset p = preset_by_name(a.preset);
  if (auto b = parse_builtin_suite(a.suite); b && a.checkpoint.empty()) p = preset_by_name(b->preset);
  InputOptions input;
  PolicyFactory factory;
  std::string model = a.model;
  if (!a.checkpoint.empty()) {
    if (!fs::exists(a.checkpoint)) throw InputError("checkpoint '" + a.checkpoint + "' not found");
    const nn::Checkpoint ck = nn::load_checkpoint(a.checkpoint);
    p = checkpoint_preset(ck, input);
    auto net = std::make_shared<const nn::Network>(ck.arch);
    if (model.empty()) model = model_name(ck);
    const SensorConfig cfg = p.sensor;
    factory = [net, theta = ck.theta, cfg, input, model] {
      return std::make_unique<NetworkPolicy>(net, theta, cfg, input, model);
    };
  } else if (a.policy == "expert") {
    const SensorConfig cfg = p.sensor;
    factory = [cfg] { return std::make_unique<ExpertPolicy>(cfg); };
  } else if (a.policy == "turn-at-end" || a.policy == "turn-at-halfway") {
    const double f = a.policy == "turn-at-end" ? 1.0 : 0.5;
    factory = [f] { return std::make_unique<ScriptedTurnPolicy>(f); };
  } else {
    throw UsageError("unknown --policy '" + a.policy + "'");
  }
  if (model.empty()) model = a.policy;
  const Suite suite = load_suite(a.suite, a.seed, a.count);
  if (suite.specs.empty()) throw InfeasibleSpec("suite is empty");
  EvalOptions opt;
  opt.step_cap = a.cap >= 0 ? a.cap : default_cap(p, suite.kind);
  opt.full_map_labels = a.full_map;
  opt.workers = a.workers;
  const SuiteReport rep = evaluate_suite(factory, suite.specs, p.layout, p.sensor, opt, model, suite.name);
  write_text_file((fs::path(a.out) / "results.csv").string(), results_csv(rep));
  write_text_file((fs::path(a.out) / "summary.csv").string(), summary_csv(rep));
  write_text_file((fs::path(a.out) / "curves.csv").string(), curves_csv(rep));
  std::cout << summary_csv(rep);
  return 0;
}

// ---- vc ---------------------------------------------------------------------

struct VcArgs {
  std::vector<std::string> checkpoints;
  std::string suite, out, config;
  int episodes = 100;
  double svm_c = 1.0;
  std::uint64_t seed = 1;
  bool svg = true;
};

int cmd_vc(const VcArgs& a) {
  if (a.checkpoints.empty()) throw UsageError("vc needs at least one --checkpoint");
  ensure_dir(a.out);
  std::vector<vcdim::VcEstimate> rows;
  for (const std::string& path : a.checkpoints) {
    if (!fs::exists(path)) throw InputError("checkpoint '" + path + "' not found");
    const nn::Checkpoint ck = nn::load_checkpoint(path);
    InputOptions input;
    const Preset p = checkpoint_preset(ck, input);
    std::vector<MapSpec> specs;
    std::string suite_name;
    if (a.suite.empty()) {
      ParamGrid grid = p.train;
      if (ck.meta.count("train_lengths")) grid.lengths = parse_list(ck.meta.at("train_lengths"));
      std::mt19937_64 rng(a.seed);
      for (int i = 0; i < a.episodes; ++i) specs.push_back(sample_spec(grid, rng));
      suite_name = "train-" + p.name;
    } else {
      const Suite s = load_suite(a.suite, a.seed, a.episodes);
      specs = s.specs;
      suite_name = s.name;
    }
    std::vector<GridMap> maps;
    for (const MapSpec& s : specs) maps.push_back(generate_map(s, p.layout));
    const nn::Network net(ck.arch);
    vcdim::FeatureSet feats = vcdim::collect_features(net, ck.theta, maps, p.sensor, input, p.extrap_cap);
    feats.seed = a.seed;
    feats.suite = suite_name;
    const std::string model = model_name(ck);
    rows.push_back(vcdim::vc_estimate(feats, model, a.svm_c));
    write_text_file((fs::path(a.out) / ("features_" + model + ".csv")).string(), vcdim::feature_csv(feats));
    const vcdim::PcaResult pca = vcdim::pca_project(feats.psi, 2);
    write_text_file((fs::path(a.out) / ("pca_" + model + ".csv")).string(), vcdim::pca_csv(pca, feats.labels));
    if (a.svg)
      write_text_file((fs::path(a.out) / ("pca_" + model + ".svg")).string(),
                      vcdim::pca_svg(pca, feats.labels, rows.back().radius, model));
  }
  const std::string csv = vcdim::vc_report_csv(rows);
  write_text_file((fs::path(a.out) / "vc_report.csv").string(), csv);
  std::cout << csv;
  return 0;
}

// ---- difficulty -------------------------------------------------------------

struct DiffArgs {
  std::string suite, preset = "small", out, lengths, kind = "culdesac", config;
  int orientation = 0, count = -1;
  std::uint64_t seed = 1;
};

int cmd_difficulty(const DiffArgs& a) {
  Preset p = preset_by_name(a.preset);
  std::vector<MapSpec> specs;
  if (!a.suite.empty()) {
    if (auto b = parse_builtin_suite(a.suite)) p = preset_by_name(b->preset);
    specs = load_suite(a.suite, a.seed, a.count).specs;
  } else {
    // Sweep obstacle length at fixed kind, width and orientation.
    const std::vector<double> lengths = a.lengths.empty() ? p.train.lengths : parse_list(a.lengths);
    for (double l : lengths) {
      MapSpec s;
      s.kind = parse_obstacle_kind(a.kind);
      s.length = l;
      s.width = p.train.widths.front();
      s.orientation = a.orientation;
      s.resolution = p.train.resolution;
      s.step = p.train.step;
      specs.push_back(s);
    }
  }
  std::ostringstream out;
  for (const MapSpec& s : specs) {
    const GridMap m = generate_map(s, p.layout);
    const PlanResult r = full_knowledge_plan(m);
    std::string line = r.to_json_line();
    // Prefix the spec so sweeps stay self-describing.
    line.insert(1, "\"spec\":\"" + format_spec(s) + "\",");
    out << line << '\n';
  }
  if (a.out.empty()) {
    std::cout << out.str();
  } else {
    const fs::path parent = fs::path(a.out).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    write_text_file(a.out, out.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memnav: memory-based navigation by imitation of an A* expert"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-maps", "Write a suite manifest and its map files");
  g->add_option("--suite", gen.suite, "Built-in suite, e.g. interp-small");
  g->add_option("--grid", gen.grid, "Parameter grid file (key=value lists)");
  g->add_option("--preset", gen.preset, "Preset supplying grid defaults");
  g->add_option("--count", gen.count, "Number of maps");
  g->add_option("--seed", gen.seed, "Sampling seed");
  g->add_option("--out", gen.out, "Output directory");
  g->add_option("--config", gen.config, "key=value file; command-line flags win");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a policy with asynchronous DAgger");
  t->add_option("--preset", tr.preset, "small, large or desk");
  t->add_option("--arch", tr.arch, "ff, lstm, dnc-ff or dnc-lstm")
      ->check(CLI::IsMember({"ff", "lstm", "dnc-ff", "dnc-lstm"}));
  t->add_option("--lambda", tr.lambda, "L2 penalty on the memory parameters");
  t->add_option("--learners", tr.learners, "Parallel learner threads");
  t->add_option("--seed", tr.seed, "Seed for initialization and episodes");
  t->add_option("--updates", tr.updates, "Global update budget J_max");
  t->add_option("--lr", tr.lr, "RMSProp learning rate");
  t->add_option("--t-max", tr.t_max, "Episode step limit");
  t->add_option("--window", tr.window, "Steps per gradient window");
  t->add_option("--lengths", tr.lengths, "Override training obstacle lengths (comma list)");
  t->add_option("--checkpoint-every", tr.checkpoint_every, "Write a checkpoint every K updates");
  t->add_option("--resume", tr.resume, "Continue from a checkpoint");
  t->add_flag("--prev-action", tr.prev_action, "Feed the previous action as input");
  t->add_flag("--argmax", tr.argmax, "Act by argmax instead of sampling");
  t->add_option("--out", tr.out, "Output directory");
  t->add_option("--config", tr.config, "key=value file; command-line flags win");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a policy on a suite");
  e->add_option("--checkpoint", ev.checkpoint, "Trained checkpoint");
  e->add_option("--policy", ev.policy, "expert, turn-at-end or turn-at-halfway");
  e->add_option("--preset", ev.preset, "Preset for non-network policies");
  e->add_option("--suite", ev.suite, "Built-in suite name or manifest path");
  e->add_option("--cap", ev.cap, "Step cap (default 200, 500 for extrapolation)");
  e->add_option("--count", ev.count, "Limit the number of maps");
  e->add_option("--seed", ev.seed, "Seed for built-in suites");
  e->add_option("--workers", ev.workers, "Parallel episode workers");
  e->add_option("--model", ev.model, "Model name in the reports");
  e->add_flag("--full-map-labels", ev.full_map, "Score against the full-knowledge planner");
  e->add_option("--out", ev.out, "Output directory");
  e->add_option("--config", ev.config, "key=value file; command-line flags win");

  VcArgs vc;
  auto* v = app.add_subcommand("vc", "Estimate eta = R^2 |w|^2 from last-layer features");
  v->add_option("--checkpoint", vc.checkpoints, "Checkpoint(s); repeat for several models");
  v->add_option("--suite", vc.suite, "Suite to roll out (default: training grid)");
  v->add_option("--episodes", vc.episodes, "Expert episodes");
  v->add_option("--svm-c", vc.svm_c, "Slack penalty C");
  v->add_option("--seed", vc.seed, "Sampling seed");
  v->add_option("--svg", vc.svg, "Write PCA scatter SVGs (true/false)");
  v->add_option("--out", vc.out, "Output directory");
  v->add_option("--config", vc.config, "key=value file; command-line flags win");

  DiffArgs df;
  auto* d = app.add_subcommand("difficulty", "A* expansions on fully known maps (JSON lines)");
  d->add_option("--suite", df.suite, "Suite name or manifest; default is a length sweep");
  d->add_option("--preset", df.preset, "Preset for the sweep");
  d->add_option("--lengths", df.lengths, "Sweep lengths (comma list)");
  d->add_option("--kind", df.kind, "culdesac or walls");
  d->add_option("--orientation", df.orientation, "Orientation for the sweep");
  d->add_option("--count", df.count, "Limit the number of maps");
  d->add_option("--seed", df.seed, "Seed for built-in suites");
  d->add_option("--out", df.out, "Output file (default stdout)");
  d->add_option("--config", df.config, "key=value file; command-line flags win");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (g->parsed()) {
      apply_config(g, gen.config);
      return cmd_gen_maps(gen);
    }
    if (t->parsed()) {
      apply_config(t, tr.config);
      return cmd_train(tr);
    }
    if (e->parsed()) {
      apply_config(e, ev.config);
      return cmd_eval(ev);
    }
    if (v->parsed()) {
      apply_config(v, vc.config);
      return cmd_vc(vc);
    }
    if (d->parsed()) {
      apply_config(d, df.config);
      return cmd_difficulty(df);
    }
  } catch (const CLI::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const InputError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const InfeasibleSpec& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const ParseError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const NoPath& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << '\n';
    return 3;
  }
  return 1;
}
