#include "memnav/policy.hpp"

#include <cmath>
#include <stdexcept>

#include "memnav/errors.hpp"

namespace memnav {

Action sample_action(const nn::Vec& probs, std::mt19937_64& rng) {
  std::discrete_distribution<int> d(probs.data(), probs.data() + probs.size());
  return static_cast<Action>(d(rng));
}

NetworkPolicy::NetworkPolicy(std::shared_ptr<const nn::Network> net, nn::Vec theta,
                             SensorConfig cfg, InputOptions input, std::string name,
                             ActionSelection selection, std::uint64_t seed)
    : net_(std::move(net)),
      theta_(std::move(theta)),
      cfg_(cfg),
      input_(input),
      name_(std::move(name)),
      selection_(selection),
      rng_(seed) {
  if (static_cast<std::size_t>(theta_.size()) != net_->num_params())
    throw ShapeMismatch("parameter vector does not match the network");
  mem_ = net_->initial_state();
}

void NetworkPolicy::reset(const GridMap&) {
  mem_ = net_->initial_state();
  prev_.reset();
}

Action NetworkPolicy::act(const RobotState&, const Observation& obs) {
  const nn::Vec x = encode_input(obs, cfg_, input_, prev_);
  last_ = net_->forward(theta_, x, mem_);
  const Action a = selection_ == ActionSelection::Sample ? sample_action(last_.probs, rng_) : last_.chosen;
  prev_ = a;
  return a;
}

void ExpertPolicy::reset(const GridMap& map) { expert_ = std::make_unique<Expert>(map, cfg_); }

Action ExpertPolicy::act(const RobotState& state, const Observation& obs) {
  if (!expert_) throw std::logic_error("ExpertPolicy::act before reset");
  return expert_->observe_and_act(state, obs);
}

std::string ScriptedTurnPolicy::name() const {
  if (fraction_ == 1.0) return "turn-at-end";
  if (fraction_ == 0.5) return "turn-at-halfway";
  return "turn-at-" + std::to_string(fraction_);
}

void ScriptedTurnPolicy::reset(const GridMap& map) {
  map_ = &map;
  forward_ = initial_heading(map);
  const double res = map.resolution();
  const int len = std::max(1, static_cast<int>(std::lround(map.spec.length / res)));
  const int cd = static_cast<int>(std::lround(map.spec.col_disp / res));
  const int depth = std::max(0, (len - 1 - cd) / map.stride());
  turn_after_ = static_cast<int>(std::lround(fraction_ * depth));
  taken_ = 0;
  plan_.clear();
  plan_pos_ = 0;
}

Action ScriptedTurnPolicy::act(const RobotState& state, const Observation&) {
  if (!map_) throw std::logic_error("ScriptedTurnPolicy::act before reset");
  const double res = map_->resolution();
  const int stride = map_->stride();
  const Cell here = cell_of(state, res);
  const Cell fwd = action_delta(forward_);
  if (plan_.empty() && taken_ < turn_after_) {
    bool clear = true;
    for (int k = 1; k <= stride; ++k)
      clear = clear && !map_->occupied({here.row + k * fwd.row, here.col + k * fwd.col});
    if (clear) {
      ++taken_;
      return forward_;
    }
  }
  if (plan_.empty()) {
    OccupancyGrid grid = OccupancyGrid::from_map(*map_);
    // Block the corridor cross-section one cell ahead.
    const Cell lat{fwd.col, fwd.row};
    const Cell ahead{here.row + fwd.row, here.col + fwd.col};
    for (int sign : {1, -1})
      for (int j = sign > 0 ? 0 : 1;; ++j) {
        const Cell side{here.row + sign * j * lat.row, here.col + sign * j * lat.col};
        if (map_->occupied(side)) break;
        const Cell b{ahead.row + sign * j * lat.row, ahead.col + sign * j * lat.col};
        if (grid.in_bounds(b)) grid.at(b) = Belief::Occupied;
      }
    plan_ = astar_plan(grid, here, map_->goal_region(), stride).path;
    plan_pos_ = 0;
  }
  while (plan_pos_ + 1 < plan_.size() && plan_[plan_pos_] != here) ++plan_pos_;
  if (plan_pos_ + 1 >= plan_.size()) return forward_;
  const Cell next = plan_[plan_pos_ + 1];
  const int dr = (next.row - here.row) / stride, dc = (next.col - here.col) / stride;
  for (Action a : kAllActions) {
    const Cell d = action_delta(a);
    if (d.row == dr && d.col == dc) return a;
  }
  throw std::logic_error("scripted plan contains a non-lattice move");
}

}  // namespace memnav
