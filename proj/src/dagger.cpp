#include "memnav/dagger.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <sstream>
#include <thread>

#include "memnav/errors.hpp"
#include "memnav/expert.hpp"
#include "memnav/map_io.hpp"

namespace memnav {

void LearnerConfig::validate() const {
  if (j_max < 1) throw std::invalid_argument("j_max must be >= 1");
  if (j_max > nn::kBpttWindow) throw std::invalid_argument("j_max must not exceed the BPTT window");
  if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
  if (J_max < 0) throw std::invalid_argument("J_max must be >= 0");
  if (n_learners < 1) throw std::invalid_argument("n_learners must be >= 1");
}

SharedParams::SharedParams(nn::Vec theta, nn::RmsPropConfig cfg, nn::RmsPropState state, long J,
                           long J_max)
    : theta_(std::make_shared<const nn::Vec>(std::move(theta))),
      cfg_(cfg),
      state_(std::move(state)),
      J_(J),
      J_max_(J_max) {
  if (state_.mean_square.size() != theta_->size())
    throw ShapeMismatch("optimizer state does not match theta");
}

std::shared_ptr<const nn::Vec> SharedParams::snapshot() const {
  std::lock_guard lock(read_mu_);
  return theta_;
}

ApplyStatus SharedParams::apply(const nn::Vec& grad, long* new_J) {
  if (!grad.allFinite()) {
    std::lock_guard lock(update_mu_);
    ++rejected_;
    std::cerr << "memnav: rejected a non-finite gradient update\n";
    return ApplyStatus::NonFinite;
  }
  std::lock_guard lock(update_mu_);
  if (aborted_ || J_ >= J_max_) return ApplyStatus::BudgetExhausted;
  auto next = std::make_shared<nn::Vec>(*theta_);
  nn::rmsprop_update(state_, *next, grad, cfg_);
  {
    std::lock_guard read_lock(read_mu_);
    theta_ = std::move(next);
    ++J_;
  }
  if (new_J) *new_J = J_;
  return ApplyStatus::Applied;
}

long SharedParams::updates() const {
  std::lock_guard lock(read_mu_);
  return J_;
}

nn::RmsPropState SharedParams::optimizer_state() const {
  std::lock_guard lock(update_mu_);
  return state_;
}

long SharedParams::rejected() const {
  std::lock_guard lock(update_mu_);
  return rejected_;
}

ApplyStatus apply_async(SharedParams& shared, const nn::Vec& grad, long* new_J) {
  return shared.apply(grad, new_J);
}

void TrainingLog::add(LogRow row) {
  std::lock_guard lock(mu_);
  rows_.push_back(std::move(row));
}

std::vector<LogRow> TrainingLog::rows() const {
  std::vector<LogRow> out;
  {
    std::lock_guard lock(mu_);
    out = rows_;
  }
  std::stable_sort(out.begin(), out.end(), [](const LogRow& a, const LogRow& b) { return a.J < b.J; });
  return out;
}

std::size_t TrainingLog::size() const {
  std::lock_guard lock(mu_);
  return rows_.size();
}

std::string TrainingLog::csv() const {
  std::ostringstream out;
  out << "J,wall_ms,loss,episode_result,map_kind,map_length\n";
  for (const LogRow& r : rows())
    out << r.J << ',' << format_real(std::round(r.wall_ms * 1000.0) / 1000.0) << ','
        << format_real(r.loss) << ',' << r.episode_result << ',' << to_string(r.map_kind) << ','
        << format_real(r.map_length) << '\n';
  return out.str();
}

namespace {

struct Episode {
  std::unique_ptr<GridMap> map;
  std::unique_ptr<Expert> expert;
  RobotState state;
  Action heading = Action::Right;
  std::optional<Action> prev;
  nn::MemoryState mem;
  int t = 0;
};

void new_episode(Episode& ep, const LearnerContext& ctx, std::mt19937_64& rng) {
  for (int attempt = 0;; ++attempt) {
    const MapSpec spec = sample_spec(ctx.env->grid, rng);
    try {
      ep.map = std::make_unique<GridMap>(generate_map(spec, ctx.env->layout));
      break;
    } catch (const InfeasibleSpec&) {
      if (attempt > 1000) throw;
    }
  }
  ep.expert = std::make_unique<Expert>(*ep.map, ctx.env->sensor);
  ep.state = start_state(*ep.map);
  ep.heading = initial_heading(*ep.map);
  ep.prev.reset();
  ep.mem = ctx.net->initial_state();
  ep.t = 0;
}

}  // namespace

void run_learner(const LearnerContext& ctx) {
  const nn::Network& net = *ctx.net;
  const TrainEnv& env = *ctx.env;
  const LearnerConfig& cfg = *ctx.cfg;
  std::seed_seq seq{static_cast<std::uint32_t>(ctx.seed), static_cast<std::uint32_t>(ctx.seed >> 32),
                    static_cast<std::uint32_t>(ctx.J_start),
                    static_cast<std::uint32_t>(ctx.learner_id)};
  std::mt19937_64 rng(seq);
  Episode ep;
  new_episode(ep, ctx, rng);

  std::vector<nn::StepTrace> window;
  std::vector<Action> labels;
  window.reserve(static_cast<std::size_t>(cfg.j_max));
  while (!ctx.shared->done()) {
    const std::shared_ptr<const nn::Vec> theta = ctx.shared->snapshot();
    window.clear();
    labels.clear();
    std::string result = "running";
    bool ended = false;
    bool discarded = false;
    for (int j = 0; j < cfg.j_max; ++j) {
      const Observation obs = sense(*ep.map, ep.state, ep.heading, env.sensor);
      Action label;
      try {
        label = ep.expert->observe_and_act(ep.state, obs);
      } catch (const NoPath&) {
        discarded = true;
        break;
      }
      const nn::Vec x = encode_input(obs, env.sensor, env.input, ep.prev);
      nn::StepTrace& tr = window.emplace_back();
      const nn::PolicyOutput out = net.forward(*theta, x, ep.mem, &tr);
      const Action a = cfg.action_selection == ActionSelection::Sample ? sample_action(out.probs, rng)
                                                                       : out.chosen;
      labels.push_back(label);
      const StepOutcome o = step(*ep.map, ep.state, a, env.sensor);
      ++ep.t;
      ep.heading = a;
      ep.prev = a;
      ep.state = o.next_state;
      if (o.terminal == Terminal::Goal) {
        result = "goal";
        ended = true;
      } else if (o.terminal == Terminal::Collision) {
        result = "collision";
        ended = true;
      } else if (ep.t >= cfg.t_max) {
        result = "timeout";
        ended = true;
      }
      if (ended) break;
    }
    if (discarded) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - ctx.t0).count();
      std::cerr << "memnav: expert found no path; episode discarded\n";
      ctx.log->add({ctx.shared->updates(), ms, std::nan(""), "discarded", ep.map->spec.kind,
                    ep.map->spec.length, ctx.learner_id});
      new_episode(ep, ctx, rng);
      continue;
    }
    const nn::Vec grad = net.backward(*theta, window, labels);
    const double loss = net.loss_from_traces(window, labels, *theta);
    long J = 0;
    const ApplyStatus status = ctx.shared->apply(grad, &J);
    if (status == ApplyStatus::BudgetExhausted) break;
    if (status == ApplyStatus::Applied) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - ctx.t0).count();
      ctx.log->add({J, ms, loss, result, ep.map->spec.kind, ep.map->spec.length, ctx.learner_id});
      if (ctx.observer && *ctx.observer) (*ctx.observer)(J, grad);
    }
    if (ended) new_episode(ep, ctx, rng);
  }
}

TrainResult train(const nn::Network& net, nn::Vec theta, nn::RmsPropState opt_state, long J0,
                  const nn::RmsPropConfig& opt_cfg, const TrainEnv& env, const TrainOptions& opt) {
  opt.learner.validate();
  env.sensor.validate();
  if (static_cast<std::size_t>(theta.size()) != net.num_params())
    throw ShapeMismatch("theta does not match the network");
  TrainResult res;
  res.log = std::make_shared<TrainingLog>();
  const auto t0 = std::chrono::steady_clock::now();
  long J = J0;
  const long J_max = opt.learner.J_max;
  while (true) {
    long end = J_max;
    if (opt.checkpoint_every > 0) end = std::min(J_max, (J / opt.checkpoint_every + 1) * opt.checkpoint_every);
    if (J >= J_max) end = J;
    SharedParams shared(std::move(theta), opt_cfg, std::move(opt_state), J, end);
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto body = [&](int id) {
      try {
        LearnerContext ctx{&net, &shared, &env, &opt.learner, res.log.get(), opt.seed, id, t0,
                           &opt.observer, J};
        run_learner(ctx);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        shared.abort();
      }
    };
    if (!shared.done()) {
      if (opt.learner.n_learners == 1) {
        body(0);
      } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < opt.learner.n_learners; ++i) pool.emplace_back(body, i);
        for (auto& t : pool) t.join();
      }
    }
    if (failure) std::rethrow_exception(failure);
    theta = *shared.snapshot();
    opt_state = shared.optimizer_state();
    res.rejected += shared.rejected();
    const bool advanced = shared.updates() > J;
    J = shared.updates();
    if (opt.checkpoint_every > 0 && opt.on_checkpoint && advanced) opt.on_checkpoint(theta, opt_state, J);
    if (J >= J_max) break;
  }
  res.theta = std::move(theta);
  res.optimizer_state = std::move(opt_state);
  res.updates = J;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

double tail_loss(const TrainingLog& log, double fraction) {
  std::vector<double> v;
  const auto rows = log.rows();
  std::vector<double> losses;
  for (const LogRow& r : rows)
    if (std::isfinite(r.loss)) losses.push_back(r.loss);
  if (losses.empty()) return std::nan("");
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * losses.size()));
  v.assign(losses.end() - static_cast<std::ptrdiff_t>(n), losses.end());
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace memnav
