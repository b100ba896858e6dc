#include "alam/rl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "alam/nn/checkpoint.hpp"

namespace alam::rl {

using nlohmann::json;

std::string agent_name(AgentKind k) {
  switch (k) {
    case AgentKind::kSac: return "sac";
    case AgentKind::kSacLag: return "sac-lag";
    case AgentKind::kSacLagNet: return "sac-lagnet";
    case AgentKind::kSacAlam: return "sac-alam";
    case AgentKind::kSacAlamGa: return "sac-alam-ga";
  }
  throw std::invalid_argument("bad agent kind");
}

AgentKind agent_from_name(const std::string& s) {
  if (s == "sac") return AgentKind::kSac;
  if (s == "sac-lag") return AgentKind::kSacLag;
  if (s == "sac-lagnet") return AgentKind::kSacLagNet;
  if (s == "sac-alam") return AgentKind::kSacAlam;
  if (s == "sac-alam-ga") return AgentKind::kSacAlamGa;
  throw std::invalid_argument("unknown agent id: " + s);
}

void AgentConfig::validate() const {
  if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("config: gamma in (0,1)");
  if (total_steps < 1 || buffer_capacity < 1 || batch_size < 1)
    throw std::invalid_argument("config: sizes must be positive");
  if (lr <= 0 || multiplier_lr <= 0 || sac_lag_lr <= 0 || tau <= 0 || tau > 1)
    throw std::invalid_argument("config: bad learning rate or tau");
  if (multiplier_interval < 1 || mc_samples < 1 || dual_steps < 1)
    throw std::invalid_argument("config: bad dual update settings");
  if (rho0 <= 0 || sigma <= 1.0 || rho_max < rho0)
    throw std::invalid_argument("config: bad penalty schedule");
  if (warmup_steps < batch_size)
    throw std::invalid_argument("config: warmup must cover at least one batch");
  if (eval_interval < 1 || eval_episodes < 1 || grad_steps_per_env_step < 1)
    throw std::invalid_argument("config: bad evaluation settings");
  if (hidden.empty()) throw std::invalid_argument("config: need at least one hidden layer");
}

// ---------------------------------------------------------------- dual steps

double lagnet_dual_step(MultiplierNet& multiplier, nn::Adam& optimizer, const Mat& states,
                        const RowVec& fhat_shifted, Tape& tape) {
  tape.reset();
  Var lam = multiplier.forward(tape, tape.constant(states), /*train=*/true);
  Var obj = tape.mean_all(tape.mul(lam, tape.constant(fhat_shifted)));
  // ascend: minimize the negated objective
  const double value = -tape.backward(tape.neg(obj));
  optimizer.step(tape);
  return value;
}

double alam_ga_dual_step(MultiplierNet& multiplier, nn::Adam& optimizer, const Mat& states,
                         const RowVec& fhat_shifted, double rho, Tape& tape) {
  tape.reset();
  Var lam = multiplier.forward(tape, tape.constant(states), /*train=*/true);
  Var max_term = tape.cmax(tape.scale(lam, -1.0 / rho), tape.constant(fhat_shifted));
  Var obj = tape.mean_all(tape.mul(lam, max_term));
  const double value = -tape.backward(tape.neg(obj));
  optimizer.step(tape);
  return value;
}

// ---------------------------------------------------------------- strategies

namespace {

class NoSafety final : public SafetyStrategy {
 public:
  AgentKind kind() const override { return AgentKind::kSac; }
  bool uses_cost_critics() const override { return false; }
  Var policy_penalty(Tape&, const Mat&, Var) override { return Var{}; }
  void dual_cycle(long, const StateSampler&, const FeasibilityFn&,
                  harness::RunLogger*) override {}
};

class ScalarLagSafety final : public SafetyStrategy {
 public:
  explicit ScalarLagSafety(const AgentConfig& cfg) : lr_(cfg.sac_lag_lr) {}

  AgentKind kind() const override { return AgentKind::kSacLag; }
  bool uses_cost_critics() const override { return true; }

  Var policy_penalty(Tape& tape, const Mat&, Var fhat) override {
    return tape.scale(tape.mean_all(fhat), lambda_);
  }

  void dual_cycle(long env_step, const StateSampler& sample_states,
                  const FeasibilityFn& feasibility, harness::RunLogger* logger) override {
    const Mat states = sample_states();
    const double mean_violation = feasibility(states).mean();
    lambda_ = std::max(0.0, lambda_ + lr_ * mean_violation);
    last_dual_loss_ = mean_violation;
    if (logger)
      logger->event({{"type", "dual_update"}, {"agent", "sac-lag"}, {"step", env_step},
                     {"lambda", lambda_}, {"mean_violation", mean_violation}});
  }

  double lambda_mean(const Mat&) const override { return lambda_; }
  double last_dual_loss() const override { return last_dual_loss_; }
  double scalar_lambda() const override { return lambda_; }
  void set_scalar_lambda(double v) override { lambda_ = std::max(0.0, v); }

 private:
  double lambda_ = 0.0;
  double lr_;
  double last_dual_loss_ = 0.0;
};

class MultiplierNetStrategy : public SafetyStrategy {
 public:
  MultiplierNetStrategy(int state_dim, const AgentConfig& cfg, std::mt19937_64& rng)
      : multiplier_(state_dim, cfg.hidden, rng, cfg.multiplier_init),
        optimizer_(block_ptrs(), cfg.multiplier_lr) {}

  bool uses_cost_critics() const override { return true; }
  double lambda_mean(const Mat& states) const override {
    return multiplier_.values(states).mean();
  }
  double last_dual_loss() const override { return last_dual_loss_; }
  MultiplierNet* multiplier() override { return &multiplier_; }

 protected:
  std::vector<nn::ParamBlock*> block_ptrs() {
    std::vector<nn::ParamBlock*> out;
    for (auto& b : multiplier_.net().blocks()) out.push_back(&b);
    return out;
  }

  MultiplierNet multiplier_;
  nn::Adam optimizer_;
  Tape dual_tape_;
  double last_dual_loss_ = 0.0;
};

class LagNetSafety final : public MultiplierNetStrategy {
 public:
  using MultiplierNetStrategy::MultiplierNetStrategy;

  AgentKind kind() const override { return AgentKind::kSacLagNet; }

  Var policy_penalty(Tape& tape, const Mat& states, Var fhat) override {
    Var lam = tape.constant(Mat(multiplier_.values(states)));
    return tape.mean_all(tape.mul(lam, fhat));
  }

  void dual_cycle(long env_step, const StateSampler& sample_states,
                  const FeasibilityFn& feasibility, harness::RunLogger* logger) override {
    const Mat states = sample_states();
    const RowVec fhat = feasibility(states);
    last_dual_loss_ = lagnet_dual_step(multiplier_, optimizer_, states, fhat, dual_tape_);
    if (logger)
      logger->event({{"type", "dual_update"}, {"agent", "sac-lagnet"}, {"step", env_step},
                     {"objective", last_dual_loss_},
                     {"mean_lambda", multiplier_.values(states).mean()}});
  }
};

class AlamSafetyBase : public MultiplierNetStrategy {
 public:
  AlamSafetyBase(int state_dim, const AgentConfig& cfg, std::mt19937_64& rng)
      : MultiplierNetStrategy(state_dim, cfg, rng),
        penalty_(cfg.rho0, cfg.sigma, cfg.rho_max),
        dual_steps_(cfg.dual_steps) {}

  Var policy_penalty(Tape& tape, const Mat& states, Var fhat) override {
    const RowVec lam_vals = multiplier_.values(states);
    Var lam = tape.constant(Mat(lam_vals));
    Var floor = tape.constant(Mat((-lam_vals / penalty_.rho).eval()));
    Var max_term = tape.cmax(floor, fhat);
    Var linear = tape.mean_all(tape.mul(lam, max_term));
    Var quad = tape.scale(tape.mean_all(tape.square(max_term)), 0.5 * penalty_.rho);
    return tape.add(linear, quad);
  }

  double rho() const override { return penalty_.rho; }
  PenaltyState& penalty() { return penalty_; }

 protected:
  /// Violation check + penalty growth, shared by both ALaM variants.
  void penalty_phase(long env_step, const StateSampler& sample_states,
                     const FeasibilityFn& feasibility, harness::RunLogger* logger,
                     const char* agent) {
    const Mat states = sample_states();
    const double v = violation_metric(states, multiplier_, feasibility, penalty_.rho);
    const double rho_before = penalty_.rho;
    const bool bumped = penalty_.update(v);
    if (logger) {
      json e = {{"type", "dual_update"}, {"agent", agent},        {"step", env_step},
                {"loss", last_dual_loss_}, {"violation", v},       {"rho", penalty_.rho},
                {"mean_lambda", multiplier_.values(states).mean()}};
      logger->event(e);
      if (bumped)
        logger->event({{"type", "penalty_update"}, {"step", env_step}, {"violation", v},
                       {"rho_before", rho_before}, {"rho_after", penalty_.rho}});
    }
  }

  PenaltyState penalty_;
  int dual_steps_;
};

class AlamSafety final : public AlamSafetyBase {
 public:
  using AlamSafetyBase::AlamSafetyBase;

  AgentKind kind() const override { return AgentKind::kSacAlam; }

  void dual_cycle(long env_step, const StateSampler& sample_states,
                  const FeasibilityFn& feasibility, harness::RunLogger* logger) override {
    last_dual_loss_ = multiplier_regression_cycle(multiplier_, optimizer_, sample_states,
                                                  feasibility, penalty_.rho, dual_steps_,
                                                  dual_tape_);
    penalty_phase(env_step, sample_states, feasibility, logger, "sac-alam");
  }
};

class AlamGaSafety final : public AlamSafetyBase {
 public:
  using AlamSafetyBase::AlamSafetyBase;

  AgentKind kind() const override { return AgentKind::kSacAlamGa; }

  void dual_cycle(long env_step, const StateSampler& sample_states,
                  const FeasibilityFn& feasibility, harness::RunLogger* logger) override {
    const Mat states = sample_states();
    const RowVec fhat = feasibility(states);
    last_dual_loss_ =
        alam_ga_dual_step(multiplier_, optimizer_, states, fhat, penalty_.rho, dual_tape_);
    penalty_phase(env_step, sample_states, feasibility, logger, "sac-alam-ga");
  }
};

}  // namespace

std::unique_ptr<SafetyStrategy> make_safety_strategy(AgentKind kind, int state_dim,
                                                     const AgentConfig& cfg,
                                                     std::mt19937_64& rng) {
  switch (kind) {
    case AgentKind::kSac: return std::make_unique<NoSafety>();
    case AgentKind::kSacLag: return std::make_unique<ScalarLagSafety>(cfg);
    case AgentKind::kSacLagNet: return std::make_unique<LagNetSafety>(state_dim, cfg, rng);
    case AgentKind::kSacAlam: return std::make_unique<AlamSafety>(state_dim, cfg, rng);
    case AgentKind::kSacAlamGa: return std::make_unique<AlamGaSafety>(state_dim, cfg, rng);
  }
  throw std::invalid_argument("bad agent kind");
}

// ---------------------------------------------------------------- trainer

namespace {

std::vector<nn::ParamBlock*> net_blocks(nn::Mlp& net) {
  std::vector<nn::ParamBlock*> out;
  for (auto& b : net.blocks()) out.push_back(&b);
  return out;
}

AgentConfig validated(AgentConfig cfg) {
  cfg.validate();
  return cfg;
}

// keep Eigen's large temporaries on the heap free-lists instead of
// mmap/munmap round trips
void tune_allocator() {
#if defined(__GLIBC__)
  static const bool once = [] {
    mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
    return true;
  }();
  (void)once;
#endif
}

}  // namespace

Trainer::Trainer(const env::Environment& environment, AgentConfig cfg, AgentKind kind,
                 std::uint64_t seed)
    : env_(environment.clone()),
      cfg_(validated(std::move(cfg))),
      kind_(kind),
      seed_(seed),
      rng_(seed),
      policy_(env_->spec().state_dim, cfg_.hidden, env_->spec().action_low,
              env_->spec().action_high, rng_),
      critics_(env_->spec().state_dim, env_->spec().action_dim, cfg_.hidden, rng_),
      temperature_(cfg_.alpha_init, std::isnan(cfg_.target_entropy)
                                        ? -static_cast<double>(env_->spec().action_dim)
                                        : cfg_.target_entropy),
      strategy_(make_safety_strategy(kind, env_->spec().state_dim, cfg_, rng_)),
      opt_policy_(net_blocks(policy_.net()), cfg_.lr),
      opt_q1_(net_blocks(critics_.q1), cfg_.lr),
      opt_q2_(net_blocks(critics_.q2), cfg_.lr),
      opt_qc1_(net_blocks(critics_.qc1), cfg_.lr),
      opt_qc2_(net_blocks(critics_.qc2), cfg_.lr),
      opt_alpha_({&temperature_.log_alpha}, cfg_.lr),
      buffer_(static_cast<std::size_t>(cfg_.buffer_capacity)) {
  tune_allocator();
  state_ = env_->reset(rng_);
}

RowVec Trainer::shifted_feasibility(const Mat& states) {
  return feasibility_estimate(states, policy_, critics_, cfg_.mc_samples, rng_).array() -
         cfg_.tolerance_d;
}

Mat Trainer::sample_states(int n) {
  const auto idx = buffer_.sample_indices(n, rng_);
  Mat states(env_->spec().state_dim, n);
  for (int j = 0; j < n; ++j) states.col(j) = buffer_.at(idx[j]).state;
  return states;
}

TrainBatch Trainer::sample_batch() {
  const int b = cfg_.batch_size;
  const auto idx = buffer_.sample_indices(b, rng_);
  TrainBatch batch;
  batch.states.resize(env_->spec().state_dim, b);
  batch.actions.resize(env_->spec().action_dim, b);
  batch.next_states.resize(env_->spec().state_dim, b);
  batch.rewards.resize(b);
  batch.costs.resize(b);
  batch.costs_at_state.resize(b);
  for (int j = 0; j < b; ++j) {
    const Transition& t = buffer_.at(idx[j]);
    batch.states.col(j) = t.state;
    batch.actions.col(j) = t.action;
    batch.next_states.col(j) = t.next_state;
    batch.rewards(j) = t.reward;
    batch.costs(j) = t.cost;
    batch.costs_at_state(j) = env_->h(t.state) > 0.0 ? 1.0 : 0.0;
  }
  return batch;
}

void Trainer::collect_step() {
  env::Vec action;
  if (env_steps_ < cfg_.warmup_steps) {
    action.resize(env_->spec().action_dim);
    for (int i = 0; i < action.size(); ++i) {
      std::uniform_real_distribution<double> u(env_->spec().action_low(i),
                                               env_->spec().action_high(i));
      action(i) = u(rng_);
    }
  } else {
    action = policy_.sample(state_, rng_).first;
  }
  const env::StepResult sr = env_->step(state_, action, episode_t_);
  buffer_.push({state_, action, sr.reward, sr.cost, sr.next_state, sr.done});
  state_ = sr.next_state;
  ++episode_t_;
  ++env_steps_;
  if (sr.done) {
    state_ = env_->reset(rng_);
    episode_t_ = 0;
  }
}

void Trainer::gradient_step() {
  const TrainBatch batch = sample_batch();
  const double alpha = temperature_.alpha();

  // critics: shared next-state action draw, min targets for reward,
  // max targets for cost
  const auto next_sample = policy_.sample_batch(batch.next_states, rng_);
  const RowVec y_r = reward_targets_with_actions(batch, critics_, next_sample.actions,
                                                 next_sample.log_prob, alpha, cfg_.gamma);
  Mat x_sa(batch.states.rows() + batch.actions.rows(), batch.states.cols());
  x_sa.topRows(batch.states.rows()) = batch.states;
  x_sa.bottomRows(batch.actions.rows()) = batch.actions;

  tape_.reset();
  Var lq1 = critic_mse(tape_, critics_.q1, x_sa, y_r);
  Var lq2 = critic_mse(tape_, critics_.q2, x_sa, y_r);
  Var critic_loss = tape_.add(lq1, lq2);
  Var lqc1{}, lqc2{};
  if (strategy_->uses_cost_critics()) {
    const RowVec y_c =
        cost_targets_with_actions(batch, critics_, next_sample.actions, cfg_.gamma);
    lqc1 = critic_mse(tape_, critics_.qc1, x_sa, y_c);
    lqc2 = critic_mse(tape_, critics_.qc2, x_sa, y_c);
    critic_loss = tape_.add(critic_loss, tape_.add(lqc1, lqc2));
  }
  const double lq1_v = tape_.value(lq1)(0, 0);
  const double lq2_v = tape_.value(lq2)(0, 0);
  const double lqc1_v = lqc1.valid() ? tape_.value(lqc1)(0, 0) : 0.0;
  const double lqc2_v = lqc2.valid() ? tape_.value(lqc2)(0, 0) : 0.0;
  tape_.backward(critic_loss);
  opt_q1_.step(tape_);
  opt_q2_.step(tape_);
  if (strategy_->uses_cost_critics()) {
    opt_qc1_.step(tape_);
    opt_qc2_.step(tape_);
  }

  // policy
  tape_.reset();
  Mat eps(env_->spec().action_dim, cfg_.batch_size);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < eps.cols(); ++j)
    for (Eigen::Index i = 0; i < eps.rows(); ++i) eps(i, j) = normal(rng_);
  RowVec log_probs;
  Var policy_loss =
      sac_policy_objective(tape_, batch.states, policy_, critics_, alpha, eps, &log_probs);
  if (strategy_->uses_cost_critics()) {
    Var fhat = feasibility_on_tape(tape_, batch.states, policy_, critics_, cfg_.mc_samples,
                                   cfg_.tolerance_d, rng_);
    Var pen = strategy_->policy_penalty(tape_, batch.states, fhat);
    if (pen.valid()) policy_loss = tape_.add(policy_loss, pen);
  }
  const double loss_pi = tape_.backward(policy_loss);
  opt_policy_.step(tape_);

  // temperature, on the same fresh action draw with densities detached
  tape_.reset();
  Var alpha_loss = temperature_loss(tape_, temperature_, log_probs);
  tape_.backward(alpha_loss);
  opt_alpha_.step(tape_);

  ++grad_steps_;
  if (!std::isfinite(loss_pi) || !std::isfinite(lq1_v) || !std::isfinite(lq2_v) ||
      !std::isfinite(lqc1_v) || !std::isfinite(lqc2_v)) {
    maybe_dump_state("non-finite loss");
    throw std::runtime_error(agent_name(kind_) + ": non-finite loss at step " +
                             std::to_string(env_steps_));
  }

  if (grad_steps_ % cfg_.multiplier_interval == 0) {
    strategy_->dual_cycle(
        env_steps_, [this] { return sample_states(cfg_.batch_size); },
        [this](const Mat& s) { return shifted_feasibility(s); }, logger_);
  }

  critics_.soft_update_targets(cfg_.tau);

  acc_loss_policy_ += loss_pi;
  acc_loss_q1_ += lq1_v;
  acc_loss_q2_ += lq2_v;
  acc_loss_qc1_ += lqc1_v;
  acc_loss_qc2_ += lqc2_v;
  ++acc_count_;
  last_batch_states_ = batch.states;
}

EvalRecord Trainer::evaluate(int episodes, std::uint64_t eval_seed) const {
  const auto stats = env::rollout(
      *env_, [this](const env::Vec& x) { return policy_.mean_action(x); }, episodes, eval_seed);
  EvalRecord r;
  for (const auto& s : stats) {
    r.mean_return += s.episode_return;
    r.mean_cost += s.total_cost;
    r.mean_violation_fraction += s.violation_fraction;
    r.mean_max_h += s.max_h;
  }
  const double n = static_cast<double>(stats.size());
  r.mean_return /= n;
  r.mean_cost /= n;
  r.mean_violation_fraction /= n;
  r.mean_max_h /= n;
  for (const auto& s : stats) {
    r.std_return += (s.episode_return - r.mean_return) * (s.episode_return - r.mean_return);
    r.std_cost += (s.total_cost - r.mean_cost) * (s.total_cost - r.mean_cost);
  }
  if (stats.size() > 1) {
    r.std_return = std::sqrt(r.std_return / (n - 1.0));
    r.std_cost = std::sqrt(r.std_cost / (n - 1.0));
  } else {
    r.std_return = r.std_cost = 0.0;
  }
  return r;
}

void Trainer::write_metric_row(harness::RunLogger* logger, const EvalRecord& ev) {
  if (!logger) return;
  harness::MetricRow row;
  row.env_step = env_steps_;
  row.episode_return = ev.mean_return;
  row.episode_cost = ev.mean_cost;
  row.violation_fraction = ev.mean_violation_fraction;
  row.rho = strategy_->rho();
  row.mean_lambda =
      last_batch_states_.cols() > 0 ? strategy_->lambda_mean(last_batch_states_) : 0.0;
  const double n = acc_count_ > 0 ? static_cast<double>(acc_count_) : 1.0;
  row.loss_policy = acc_loss_policy_ / n;
  row.loss_q1 = acc_loss_q1_ / n;
  row.loss_q2 = acc_loss_q2_ / n;
  row.loss_qc1 = acc_loss_qc1_ / n;
  row.loss_qc2 = acc_loss_qc2_ / n;
  row.loss_multiplier = strategy_->last_dual_loss();
  logger->metric(row);
  acc_loss_policy_ = acc_loss_q1_ = acc_loss_q2_ = acc_loss_qc1_ = acc_loss_qc2_ = 0.0;
  acc_count_ = 0;
}

EvalRecord Trainer::run(harness::RunLogger* logger) {
  logger_ = logger;
  const auto t_start = std::chrono::steady_clock::now();
  if (logger)
    logger->event({{"type", "run_start"}, {"agent", agent_name(kind_)}, {"env", env_->id()},
                   {"seed", seed_}, {"start_step", env_steps_},
                   {"total_steps", cfg_.total_steps}});

  EvalRecord final_eval;
  while (env_steps_ < cfg_.total_steps) {
    collect_step();
    if (env_steps_ > cfg_.warmup_steps &&
        buffer_.size() >= static_cast<std::size_t>(cfg_.batch_size)) {
      for (int g = 0; g < cfg_.grad_steps_per_env_step; ++g) gradient_step();
    }
    if (env_steps_ % cfg_.eval_interval == 0 || env_steps_ == cfg_.total_steps) {
      final_eval = evaluate(cfg_.eval_episodes, seed_ * 0x9e3779b9ULL + env_steps_);
      write_metric_row(logger, final_eval);
      if (logger) {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        logger->event({{"type", "progress"}, {"step", env_steps_}, {"wall_time_s", wall},
                       {"return", final_eval.mean_return}, {"cost", final_eval.mean_cost}});
        save_checkpoint(logger->dir() + "/checkpoint.ckpt");
      }
    }
  }
  if (logger) {
    save_checkpoint(logger->dir() + "/checkpoint.ckpt");
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    logger->event({{"type", "run_end"}, {"step", env_steps_}, {"wall_time_s", wall}});
  }
  logger_ = nullptr;
  return final_eval;
}

void Trainer::save_checkpoint(const std::string& path) const {
  std::vector<nn::CheckpointEntry> nets = {
      {"policy", &policy_.net()}, {"q1", &critics_.q1},   {"q2", &critics_.q2},
      {"qc1", &critics_.qc1},     {"qc2", &critics_.qc2}, {"tq1", &critics_.tq1},
      {"tq2", &critics_.tq2},     {"tqc1", &critics_.tqc1}, {"tqc2", &critics_.tqc2}};
  const SafetyStrategy& strat = *strategy_;
  if (const MultiplierNet* m = strat.multiplier()) nets.push_back({"lambda", &m->net()});
  json extra;
  extra["agent"] = agent_name(kind_);
  extra["env"] = env_->id();
  extra["seed"] = seed_;
  extra["env_steps"] = env_steps_;
  extra["grad_steps"] = grad_steps_;
  extra["log_alpha"] = temperature_.log_alpha.value(0, 0);
  extra["rho"] = strategy_->rho();
  extra["scalar_lambda"] = strategy_->scalar_lambda();
  nn::save_checkpoint(path, nets, extra);
}

void Trainer::load_checkpoint(const std::string& path) {
  const auto ck = nn::load_checkpoint(path);
  ck.restore("policy", policy_.net());
  ck.restore("q1", critics_.q1);
  ck.restore("q2", critics_.q2);
  ck.restore("qc1", critics_.qc1);
  ck.restore("qc2", critics_.qc2);
  ck.restore("tq1", critics_.tq1);
  ck.restore("tq2", critics_.tq2);
  ck.restore("tqc1", critics_.tqc1);
  ck.restore("tqc2", critics_.tqc2);
  if (MultiplierNet* m = strategy_->multiplier())
    if (ck.has("lambda")) ck.restore("lambda", m->net());
  const json& extra = ck.header.at("extra");
  temperature_.log_alpha.value(0, 0) = extra.at("log_alpha").get<double>();
  if (auto* alam = dynamic_cast<AlamSafetyBase*>(strategy_.get()))
    alam->penalty().rho = extra.at("rho").get<double>();
  strategy_->set_scalar_lambda(extra.at("scalar_lambda").get<double>());
  env_steps_ = extra.at("env_steps").get<long>();
  grad_steps_ = extra.at("grad_steps").get<long>();

  // replay contents are not stored; refill with the restored policy
  if (env_steps_ > 0 && env_steps_ < cfg_.total_steps) {
    state_ = env_->reset(rng_);
    episode_t_ = 0;
    const long refill = std::min<long>(cfg_.warmup_steps, cfg_.buffer_capacity);
    for (long i = 0; i < refill; ++i) {
      const env::Vec a = policy_.sample(state_, rng_).first;
      const env::StepResult sr = env_->step(state_, a, episode_t_);
      buffer_.push({state_, a, sr.reward, sr.cost, sr.next_state, sr.done});
      state_ = sr.next_state;
      ++episode_t_;
      if (sr.done) {
        state_ = env_->reset(rng_);
        episode_t_ = 0;
      }
    }
  }
}

void Trainer::maybe_dump_state(const std::string& reason) {
  if (!logger_) return;
  logger_->event({{"type", "abort"}, {"reason", reason}, {"step", env_steps_}});
  try {
    save_checkpoint(logger_->dir() + "/abort_dump.ckpt");
  } catch (...) {
  }
}

}  // namespace alam::rl
