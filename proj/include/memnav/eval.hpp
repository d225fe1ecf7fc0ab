#pragma once

// Episode rollouts and the three navigation metrics: success rate,
// classification accuracy against the expert, and path-length ratio against
// the expert, per map kind and per obstacle length.

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "memnav/gridworld.hpp"
#include "memnav/policy.hpp"

namespace memnav {

enum class Termination { Goal, Collision, Timeout };
const char* to_string(Termination t);

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  int agree = 0;          // steps where the policy action equals the expert label
  int expert_cost = 0;    // moves of the belief expert's own rollout on this map
  int optimal_cost = 0;   // moves of the full-knowledge shortest path
  MapSpec map;
  Termination termination = Termination::Timeout;
};

struct EvalOptions {
  int step_cap = 200;
  // Label each visited state with the full-knowledge planner instead of the
  // belief expert that maps alongside the policy.
  bool full_map_labels = false;
  int workers = 1;
};

EpisodeResult run_episode(Policy& policy, const GridMap& map, const SensorConfig& cfg,
                          const EvalOptions& opt);

struct Metrics {
  int episodes = 0;
  int successes = 0;
  long steps = 0;
  long agree = 0;
  double success_rate = 0.0;
  double class_acc = 0.0;
  double astar_ratio = 0.0;  // mean steps / expert_cost over successes; NaN when none
};

struct LengthPoint {
  ObstacleKind kind;
  double length;
  Metrics metrics;
};

struct SuiteReport {
  std::string model;
  std::string suite;
  std::vector<EpisodeResult> episodes;  // manifest order
  std::map<ObstacleKind, Metrics> per_kind;
  Metrics overall;
  std::vector<LengthPoint> per_length;  // sorted by (kind, length)
};

Metrics aggregate(const std::vector<const EpisodeResult*>& eps);

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

// Runs every spec of the suite, fanning out over opt.workers threads; each
// worker builds its own policy. Results are merged in manifest order.
SuiteReport evaluate_suite(const PolicyFactory& factory, const std::vector<MapSpec>& specs,
                           const LayoutOptions& layout, const SensorConfig& cfg,
                           const EvalOptions& opt, const std::string& model,
                           const std::string& suite);

// model,suite,map_kind,length,success,steps,agree,expert_cost,optimal_cost,termination
std::string results_csv(const SuiteReport& r, bool header = true);
// model,suite,map_kind,episodes,success_rate,class_acc,astar_ratio
std::string summary_csv(const SuiteReport& r, bool header = true);
// model,suite,map_kind,length,episodes,success_rate,class_acc,astar_ratio
std::string curves_csv(const SuiteReport& r, bool header = true);

}  // namespace memnav
