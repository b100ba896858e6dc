#pragma once

#include <functional>
#include <random>

#include "alam/nn/adam.hpp"
#include "alam/nn/mlp.hpp"

namespace alam::rl {

using nn::Mat;
using nn::RowVec;
using nn::Tape;
using nn::Var;

/// Closed-form minimizer of lam*(F+p) + (rho/2)(F+p)^2 over p >= 0:
///   p = max{-lam/rho - F, 0}.
double slack(double lam, double f_val, double rho);

/// Analytic dual target max{lam + rho*F, 0}; equals lam + rho*(F + slack).
double dual_target(double lam, double f_val, double rho);

/// Penalty factor with its geometric growth schedule. rho is nondecreasing,
/// multiplied by sigma only when the violation metric exceeds 1/rho, and
/// clipped at rho_max.
struct PenaltyState {
  double rho;
  double sigma;
  double rho_max;
  double rho0;

  PenaltyState(double rho0_, double sigma_, double rho_max_);
  /// Returns true when rho was bumped.
  bool update(double violation);
};

/// State-dependent nonnegative multiplier lambda_w(x). The softplus output
/// map keeps dual feasibility everywhere; the final layer starts at a small
/// constant so training begins near the unconstrained problem.
class MultiplierNet {
 public:
  MultiplierNet(int state_dim, const std::vector<int>& hidden, std::mt19937_64& rng,
                double initial_value = 0.05);

  RowVec values(const Mat& states) const;
  double value(const nn::Vec& state) const;
  Var forward(Tape& tape, Var states, bool train) const;

  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }

 private:
  nn::Mlp net_;
};

/// Batch of (already tolerance-shifted) feasibility values for given states.
using FeasibilityFn = std::function<RowVec(const Mat&)>;
/// Draws a fresh batch of replay states.
using StateSampler = std::function<Mat()>;

/// One cycle of the supervised dual update: n_steps small gradient steps on
///   L_lambda = E[(lambda_w(x) - sg(max{lambda_w(x) + rho*F(x), 0}))^2],
/// each step on a fresh state batch with the target rebuilt from the live
/// network. Returns the last step's loss.
double multiplier_regression_cycle(MultiplierNet& multiplier, nn::Adam& optimizer,
                                   const StateSampler& sample_states,
                                   const FeasibilityFn& feasibility, double rho, int n_steps,
                                   Tape& tape);

/// v = sqrt(mean_x max{F(x), -lambda_w(x)/rho}^2) over the batch.
double violation_metric(const Mat& states, const MultiplierNet& multiplier,
                        const FeasibilityFn& feasibility, double rho);

}  // namespace alam::rl
