#include "memnav/eval.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "memnav/errors.hpp"
#include "memnav/expert.hpp"
#include "memnav/map_io.hpp"

namespace memnav {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Goal: return "goal";
    case Termination::Collision: return "collision";
    case Termination::Timeout: return "timeout";
  }
  return "?";
}

EpisodeResult run_episode(Policy& policy, const GridMap& map, const SensorConfig& cfg,
                          const EvalOptions& opt) {
  EpisodeResult r;
  r.map = map.spec;
  r.expert_cost = expert_rollout(map, cfg, 100000).steps();
  r.optimal_cost = full_knowledge_plan(map).cost;

  const OccupancyGrid truth = OccupancyGrid::from_map(map);
  const std::vector<Cell> goal = map.goal_region();
  Expert expert(map, cfg);
  policy.reset(map);
  RobotState s = start_state(map);
  Action heading = initial_heading(map);
  while (r.steps < opt.step_cap) {
    const Observation obs = sense(map, s, heading, cfg);
    Action label = expert.observe_and_act(s, obs);
    if (opt.full_map_labels) label = expert_action(truth, s, goal, map.stride());
    const Action a = policy.act(s, obs);
    ++r.steps;
    if (a == label) ++r.agree;
    const StepOutcome o = step(map, s, a, cfg);
    heading = a;
    s = o.next_state;
    if (o.terminal == Terminal::Goal) {
      r.success = true;
      r.termination = Termination::Goal;
      return r;
    }
    if (o.terminal == Terminal::Collision) {
      r.termination = Termination::Collision;
      return r;
    }
  }
  r.termination = Termination::Timeout;
  return r;
}

Metrics aggregate(const std::vector<const EpisodeResult*>& eps) {
  Metrics m;
  double ratio_sum = 0.0;
  for (const EpisodeResult* e : eps) {
    ++m.episodes;
    m.steps += e->steps;
    m.agree += e->agree;
    if (e->success) {
      ++m.successes;
      ratio_sum += static_cast<double>(e->steps) / std::max(1, e->expert_cost);
    }
  }
  m.success_rate = m.episodes ? static_cast<double>(m.successes) / m.episodes : 0.0;
  m.class_acc = m.steps ? static_cast<double>(m.agree) / static_cast<double>(m.steps) : 0.0;
  m.astar_ratio = m.successes ? ratio_sum / m.successes : std::numeric_limits<double>::quiet_NaN();
  return m;
}

SuiteReport evaluate_suite(const PolicyFactory& factory, const std::vector<MapSpec>& specs,
                           const LayoutOptions& layout, const SensorConfig& cfg,
                           const EvalOptions& opt, const std::string& model,
                           const std::string& suite) {
  SuiteReport rep;
  rep.model = model;
  rep.suite = suite;
  rep.episodes.resize(specs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    try {
      std::unique_ptr<Policy> policy = factory();
      for (std::size_t i = next++; i < specs.size(); i = next++) {
        const GridMap map = generate_map(specs[i], layout);
        rep.episodes[i] = run_episode(*policy, map, cfg, opt);
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = specs.size();
    }
  };
  const int n = std::max(1, std::min<int>(opt.workers, static_cast<int>(specs.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<const EpisodeResult*> all;
  std::map<ObstacleKind, std::vector<const EpisodeResult*>> by_kind;
  std::map<std::pair<ObstacleKind, double>, std::vector<const EpisodeResult*>> by_len;
  for (const EpisodeResult& e : rep.episodes) {
    all.push_back(&e);
    by_kind[e.map.kind].push_back(&e);
    by_len[{e.map.kind, e.map.length}].push_back(&e);
  }
  rep.overall = aggregate(all);
  for (const auto& [k, v] : by_kind) rep.per_kind[k] = aggregate(v);
  for (const auto& [k, v] : by_len) rep.per_length.push_back({k.first, k.second, aggregate(v)});
  return rep;
}

namespace {

std::string ratio_text(double r) { return std::isnan(r) ? "nan" : format_real(r); }

}  // namespace

std::string results_csv(const SuiteReport& r, bool header) {
  std::ostringstream out;
  if (header)
    out << "model,suite,map_kind,length,success,steps,agree,expert_cost,optimal_cost,termination\n";
  for (const EpisodeResult& e : r.episodes)
    out << r.model << ',' << r.suite << ',' << to_string(e.map.kind) << ',' << format_real(e.map.length)
        << ',' << (e.success ? 1 : 0) << ',' << e.steps << ',' << e.agree << ',' << e.expert_cost << ','
        << e.optimal_cost << ',' << to_string(e.termination) << '\n';
  return out.str();
}

std::string summary_csv(const SuiteReport& r, bool header) {
  std::ostringstream out;
  if (header) out << "model,suite,map_kind,episodes,success_rate,class_acc,astar_ratio\n";
  auto row = [&](const std::string& kind, const Metrics& m) {
    out << r.model << ',' << r.suite << ',' << kind << ',' << m.episodes << ','
        << format_real(m.success_rate) << ',' << format_real(m.class_acc) << ','
        << ratio_text(m.astar_ratio) << '\n';
  };
  for (const auto& [k, m] : r.per_kind) row(to_string(k), m);
  row("all", r.overall);
  return out.str();
}

std::string curves_csv(const SuiteReport& r, bool header) {
  std::ostringstream out;
  if (header) out << "model,suite,map_kind,length,episodes,success_rate,class_acc,astar_ratio\n";
  for (const LengthPoint& p : r.per_length)
    out << r.model << ',' << r.suite << ',' << to_string(p.kind) << ',' << format_real(p.length) << ','
        << p.metrics.episodes << ',' << format_real(p.metrics.success_rate) << ','
        << format_real(p.metrics.class_acc) << ',' << ratio_text(p.metrics.astar_ratio) << '\n';
  return out.str();
}

}  // namespace memnav
