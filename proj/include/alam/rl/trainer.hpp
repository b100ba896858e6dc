#pragma once

#include <memory>
#include <optional>

#include "alam/env/environments.hpp"
#include "alam/harness/logging.hpp"
#include "alam/rl/config.hpp"
#include "alam/rl/critics.hpp"
#include "alam/rl/multiplier.hpp"
#include "alam/rl/replay.hpp"

namespace alam::rl {

/// Dual gradient-ascent step on the standard Lagrangian term
///   w <- w + lr * E[F(x) * grad_w lambda_w(x)]
/// (the SAC-LagNet multiplier update; F already tolerance-shifted).
/// Returns the ascended objective E[lambda_w(x) * F(x)].
double lagnet_dual_step(MultiplierNet& multiplier, nn::Adam& optimizer, const Mat& states,
                        const RowVec& fhat_shifted, Tape& tape);

/// Dual gradient-ascent step on the augmented term
///   E[lambda_w(x) * max{-lambda_w(x)/rho, F(x)}]
/// (the SAC-ALaM-GA ablation; gradient flows through both occurrences).
/// Returns the ascended objective value.
double alam_ga_dual_step(MultiplierNet& multiplier, nn::Adam& optimizer, const Mat& states,
                         const RowVec& fhat_shifted, double rho, Tape& tape);

/// Per-agent safety mechanism plugged into the shared SAC backbone. The
/// four safe agents and the plain-SAC reference differ only through this
/// interface.
class SafetyStrategy {
 public:
  virtual ~SafetyStrategy() = default;
  virtual AgentKind kind() const = 0;
  /// Plain SAC skips cost critics and feasibility work entirely.
  virtual bool uses_cost_critics() const = 0;
  /// Penalty added to the policy objective; fhat_shifted is the feasibility
  /// estimate on the tape (invalid Var when uses_cost_critics() is false).
  virtual Var policy_penalty(Tape& tape, const Mat& states, Var fhat_shifted) = 0;
  /// Dual update cycle, run every multiplier_interval gradient steps.
  virtual void dual_cycle(long env_step, const StateSampler& sample_states,
                          const FeasibilityFn& feasibility, harness::RunLogger* logger) = 0;

  virtual double lambda_mean(const Mat& states) const { return 0.0; }
  virtual double rho() const { return 0.0; }
  virtual double last_dual_loss() const { return 0.0; }
  virtual MultiplierNet* multiplier() { return nullptr; }
  const MultiplierNet* multiplier() const {
    return const_cast<SafetyStrategy*>(this)->multiplier();
  }
  virtual double scalar_lambda() const { return 0.0; }
  virtual void set_scalar_lambda(double) {}
};

std::unique_ptr<SafetyStrategy> make_safety_strategy(AgentKind kind, int state_dim,
                                                     const AgentConfig& cfg,
                                                     std::mt19937_64& rng);

struct EvalRecord {
  double mean_return = 0.0, std_return = 0.0;
  double mean_cost = 0.0, std_cost = 0.0;
  double mean_violation_fraction = 0.0;
  double mean_max_h = 0.0;
};

/// Off-policy training loop shared by every agent (Algorithm: collect one
/// transition, one gradient step on both critic pairs, the policy and the
/// temperature, a dual cycle every multiplier_interval steps, then target
/// soft updates). Deterministic given (config, seed) in a single thread.
class Trainer {
 public:
  Trainer(const env::Environment& environment, AgentConfig cfg, AgentKind kind,
          std::uint64_t seed);

  /// Runs to total_steps, logging eval rows and events. Returns the final
  /// evaluation record.
  EvalRecord run(harness::RunLogger* logger);

  EvalRecord evaluate(int episodes, std::uint64_t eval_seed) const;

  void save_checkpoint(const std::string& path) const;
  /// Restores networks and counters; replay contents are not persisted, the
  /// buffer is refilled with the current policy before training resumes.
  void load_checkpoint(const std::string& path);

  long env_steps_done() const { return env_steps_; }
  PolicyHead& policy() { return policy_; }
  CriticEnsemble& critics() { return critics_; }
  SafetyStrategy& strategy() { return *strategy_; }
  Temperature& temperature() { return temperature_; }
  const AgentConfig& config() const { return cfg_; }

  /// Shifted Monte Carlo feasibility over arbitrary states (used by the
  /// dual cycle, the violation metric and diagnostics).
  RowVec shifted_feasibility(const Mat& states);

 private:
  void collect_step();
  void gradient_step();
  TrainBatch sample_batch();
  Mat sample_states(int n);
  void write_metric_row(harness::RunLogger* logger, const EvalRecord& ev);
  void maybe_dump_state(const std::string& reason);

  std::unique_ptr<env::Environment> env_;
  AgentConfig cfg_;
  AgentKind kind_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;

  PolicyHead policy_;
  CriticEnsemble critics_;
  Temperature temperature_;
  std::unique_ptr<SafetyStrategy> strategy_;

  nn::Adam opt_policy_, opt_q1_, opt_q2_, opt_qc1_, opt_qc2_, opt_alpha_;
  ReplayBuffer buffer_;
  Tape tape_;

  env::Vec state_;
  int episode_t_ = 0;
  long env_steps_ = 0;
  long grad_steps_ = 0;

  // running loss means between metric rows
  double acc_loss_policy_ = 0, acc_loss_q1_ = 0, acc_loss_q2_ = 0;
  double acc_loss_qc1_ = 0, acc_loss_qc2_ = 0;
  long acc_count_ = 0;
  Mat last_batch_states_;
  harness::RunLogger* logger_ = nullptr;
};

}  // namespace alam::rl
