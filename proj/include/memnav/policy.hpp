#pragma once

// Closed-loop policies evaluated by rollouts: trained networks, the belief
// expert, and scripted baselines that turn back at a fixed fraction of the
// obstacle.

#include <memory>
#include <optional>
#include <random>
#include <string>

#include "memnav/expert.hpp"
#include "memnav/gridworld.hpp"
#include "memnav/nn/network.hpp"
#include "memnav/presets.hpp"

namespace memnav {

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Start of an episode on `map`.
  virtual void reset(const GridMap& map) = 0;
  virtual Action act(const RobotState& state, const Observation& obs) = 0;
};

enum class ActionSelection { Sample, Argmax };

class NetworkPolicy : public Policy {
 public:
  NetworkPolicy(std::shared_ptr<const nn::Network> net, nn::Vec theta, SensorConfig cfg,
                InputOptions input, std::string name,
                ActionSelection selection = ActionSelection::Argmax, std::uint64_t seed = 0);
  std::string name() const override { return name_; }
  void reset(const GridMap& map) override;
  Action act(const RobotState& state, const Observation& obs) override;
  const nn::PolicyOutput& last_output() const { return last_; }

 private:
  std::shared_ptr<const nn::Network> net_;
  nn::Vec theta_;
  SensorConfig cfg_;
  InputOptions input_;
  std::string name_;
  ActionSelection selection_;
  std::mt19937_64 rng_;
  nn::MemoryState mem_;
  std::optional<Action> prev_;
  nn::PolicyOutput last_;
};

class ExpertPolicy : public Policy {
 public:
  explicit ExpertPolicy(SensorConfig cfg) : cfg_(cfg) {}
  std::string name() const override { return "expert"; }
  void reset(const GridMap& map) override;
  Action act(const RobotState& state, const Observation& obs) override;

 private:
  SensorConfig cfg_;
  std::unique_ptr<Expert> expert_;
};

// Drives straight into the obstacle for `fraction` of the reachable depth,
// then treats the corridor ahead as blocked and follows the shortest path on
// the true map. fraction 1 turns at the far end, 0.5 at halfway.
class ScriptedTurnPolicy : public Policy {
 public:
  explicit ScriptedTurnPolicy(double fraction) : fraction_(fraction) {}
  std::string name() const override;
  void reset(const GridMap& map) override;
  Action act(const RobotState& state, const Observation& obs) override;

 private:
  double fraction_;
  const GridMap* map_ = nullptr;
  Action forward_ = Action::Right;
  int turn_after_ = 0;
  int taken_ = 0;
  std::vector<Cell> plan_;
  std::size_t plan_pos_ = 0;
};

// Sample an index from a probability vector.
Action sample_action(const nn::Vec& probs, std::mt19937_64& rng);

}  // namespace memnav
