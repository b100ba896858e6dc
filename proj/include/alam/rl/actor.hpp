#pragma once

#include <random>
#include <utility>

#include "alam/nn/adam.hpp"
#include "alam/nn/mlp.hpp"

namespace alam::rl {

using nn::Mat;
using nn::ParamBlock;
using nn::RowVec;
using nn::Tape;
using nn::Var;
using nn::Vec;

/// Entropy temperature alpha = exp(log_alpha), trained toward a target
/// entropy of -dim(A).
struct Temperature {
  ParamBlock log_alpha;
  double target_entropy = 0.0;

  Temperature(double alpha_init, double target_entropy_);
  double alpha() const { return std::exp(log_alpha.value(0, 0)); }
};

/// Stochastic policy: a Gaussian head squashed through tanh and affinely
/// mapped into the action box. log-std is clamped to [-20, 2].
class PolicyHead {
 public:
  PolicyHead(int state_dim, const std::vector<int>& hidden, const Vec& action_low,
             const Vec& action_high, std::mt19937_64& rng);

  int action_dim() const { return static_cast<int>(scale_.size()); }
  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }

  /// One stochastic action with its log-density (tanh correction included).
  std::pair<Vec, double> sample(const Vec& state, std::mt19937_64& rng) const;
  /// Squashed mean, the deterministic evaluation-mode action.
  Vec mean_action(const Vec& state) const;

  /// Batched sampling without a tape (targets, feasibility estimates).
  struct SampleBatch {
    Mat actions;
    RowVec log_prob;
  };
  SampleBatch sample_batch(const Mat& states, std::mt19937_64& rng) const;

  /// Reparameterized sampling recorded on a tape. `states` is a constant
  /// node (batch of columns); `eps` the standard-normal draw, action_dim x
  /// cols(states). Gradients flow to the policy parameters only.
  struct SampleNode {
    Var actions;   // action_dim x B, inside the bounds
    Var log_prob;  // 1 x B
  };
  SampleNode sample_on_tape(Tape& tape, Var states, const Mat& eps) const;

  /// One recorded forward pass exposing the Gaussian head; lets several
  /// sample draws (entropy term, feasibility samples) share the network
  /// evaluation.
  struct DistNode {
    Var mean;     // action_dim x B
    Var log_std;  // clamped
    Var std;
  };
  DistNode distribution_on_tape(Tape& tape, Var states, bool train = true) const;
  SampleNode sample_from(Tape& tape, const DistNode& dist, const Mat& eps) const;
  /// K action draws per state from a B-wide head: returns action_dim x B*K
  /// with sample blocks side by side (no densities).
  Var tiled_actions_from(Tape& tape, const DistNode& dist, const Mat& eps, int k) const;

  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;

 private:
  nn::Mlp net_;  // state -> (mean, log_std) stacked
  Vec scale_, center_;
  Vec low_, high_;
};

struct TrainBatch;  // critics.hpp

/// L(alpha) = E[alpha * (-log pi(a|x) - H)] with the log-densities treated
/// as constants. `log_probs` are fresh policy samples at the batch states.
Var temperature_loss(Tape& tape, Temperature& temperature, const RowVec& log_probs);

}  // namespace alam::rl
