#pragma once

// Asynchronous DAgger: learner threads act under snapshots of the global
// policy, label every visited state with the belief expert and push window
// gradients to a shared parameter store that serializes RMSProp updates.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "memnav/gridworld.hpp"
#include "memnav/nn/network.hpp"
#include "memnav/nn/rmsprop.hpp"
#include "memnav/policy.hpp"
#include "memnav/presets.hpp"

namespace memnav {

struct LearnerConfig {
  int j_max = 5;      // steps per gradient window
  int t_max = 200;    // episode step limit
  long J_max = 1000;  // global update budget
  int n_learners = 1;
  ActionSelection action_selection = ActionSelection::Sample;

  void validate() const;
};

enum class ApplyStatus { Applied, NonFinite, BudgetExhausted };

// The only shared mutable object. Snapshots are immutable; an update builds
// the next parameter vector and publishes it atomically, so readers never see
// a torn vector. J is exact: it counts applied updates.
class SharedParams {
 public:
  SharedParams(nn::Vec theta, nn::RmsPropConfig cfg, nn::RmsPropState state, long J, long J_max);

  std::shared_ptr<const nn::Vec> snapshot() const;
  ApplyStatus apply(const nn::Vec& grad, long* new_J = nullptr);
  long updates() const;
  bool done() const { return aborted_ || updates() >= J_max_; }
  // Makes done() true; used when a learner fails.
  void abort() { aborted_ = true; }
  long budget() const { return J_max_; }
  nn::RmsPropState optimizer_state() const;
  long rejected() const;

 private:
  mutable std::mutex update_mu_;
  mutable std::mutex read_mu_;
  std::shared_ptr<const nn::Vec> theta_;
  nn::RmsPropConfig cfg_;
  nn::RmsPropState state_;
  long J_;
  long J_max_;
  long rejected_ = 0;
  std::atomic<bool> aborted_{false};
};

ApplyStatus apply_async(SharedParams& shared, const nn::Vec& grad, long* new_J = nullptr);

struct LogRow {
  long J = 0;
  double wall_ms = 0.0;
  double loss = 0.0;
  std::string episode_result;  // goal, collision, timeout, running, discarded
  ObstacleKind map_kind = ObstacleKind::CulDeSac;
  double map_length = 0.0;
  int learner = 0;
};

class TrainingLog {
 public:
  void add(LogRow row);
  std::vector<LogRow> rows() const;  // sorted by J
  std::string csv() const;           // J,wall_ms,loss,episode_result,map_kind,map_length
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<LogRow> rows_;
};

struct TrainEnv {
  ParamGrid grid;
  LayoutOptions layout;
  SensorConfig sensor;
  InputOptions input;
};

// Called after every applied update with the new J and the gradient applied.
using UpdateObserver = std::function<void(long J, const nn::Vec& grad)>;

struct LearnerContext {
  const nn::Network* net;
  SharedParams* shared;
  const TrainEnv* env;
  const LearnerConfig* cfg;
  TrainingLog* log;
  std::uint64_t seed;
  int learner_id;
  std::chrono::steady_clock::time_point t0;
  const UpdateObserver* observer = nullptr;
  long J_start = 0;  // seeds the learner's episode stream with (seed, J_start, id)
};

// One learner thread body; returns when the store's budget is exhausted.
void run_learner(const LearnerContext& ctx);

struct TrainOptions {
  LearnerConfig learner;
  std::uint64_t seed = 1;
  // 0 = one segment. Otherwise training stops every `checkpoint_every`
  // updates, calls on_checkpoint, and restarts learners with fresh episodes
  // seeded from (seed, J); a run resumed from any of these checkpoints
  // retraces the uninterrupted run when n_learners = 1.
  long checkpoint_every = 0;
  std::function<void(const nn::Vec& theta, const nn::RmsPropState& opt, long J)> on_checkpoint;
  UpdateObserver observer;
};

struct TrainResult {
  nn::Vec theta;
  nn::RmsPropState optimizer_state;
  long updates = 0;
  long rejected = 0;
  double wall_seconds = 0.0;
  std::shared_ptr<TrainingLog> log;
};

TrainResult train(const nn::Network& net, nn::Vec theta, nn::RmsPropState opt_state, long J0,
                  const nn::RmsPropConfig& opt_cfg, const TrainEnv& env, const TrainOptions& opt);

// Median window loss over the last `fraction` of log rows.
double tail_loss(const TrainingLog& log, double fraction = 0.1);

}  // namespace memnav
