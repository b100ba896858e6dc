#pragma once

#include <random>

#include "alam/rl/actor.hpp"

namespace alam::rl {

/// Sampled training batch, one column per transition. `costs_at_state` is
/// the indicator cost evaluated at the batch state itself (the cost target
/// is c(x) + gamma * max_i Qc(x', a')), while `costs` carries the stored
/// transition cost at the next state.
struct TrainBatch {
  Mat states;
  Mat actions;
  Mat next_states;
  RowVec rewards;
  RowVec costs;
  RowVec costs_at_state;
};

/// Reward critics with clipped-double min targets, cost critics with
/// pessimistic max targets, plus the four target copies. Cost critics carry
/// the nonneg output map.
struct CriticEnsemble {
  nn::Mlp q1, q2, qc1, qc2;
  nn::Mlp tq1, tq2, tqc1, tqc2;

  CriticEnsemble(int state_dim, int action_dim, const std::vector<int>& hidden,
                 std::mt19937_64& rng);

  int input_dim() const { return q1.config().input_dim; }
  void soft_update_targets(double tau);
};

/// y_phi = r + gamma * (min_i tQ_i(x', a') - alpha * log pi(a'|x')), a' fresh.
/// Episodes end only by horizon, so targets always bootstrap.
RowVec reward_targets(const TrainBatch& batch, const CriticEnsemble& ens,
                      const PolicyHead& policy, double alpha, double gamma,
                      std::mt19937_64& rng);

/// y_psi = c(x) + gamma * max_i tQc_i(x', a'), pessimistic over the pair.
/// Reuses the same next-state action draw as the reward targets when both
/// are computed together (see Trainer); standalone callers pass fresh rng.
RowVec cost_targets(const TrainBatch& batch, const CriticEnsemble& ens,
                    const PolicyHead& policy, double gamma, std::mt19937_64& rng);

RowVec reward_targets_with_actions(const TrainBatch& batch, const CriticEnsemble& ens,
                                   const Mat& next_actions, const RowVec& next_log_probs,
                                   double alpha, double gamma);
RowVec cost_targets_with_actions(const TrainBatch& batch, const CriticEnsemble& ens,
                                 const Mat& next_actions, double gamma);

/// Mean squared error of one critic against fixed targets, on the tape.
Var critic_mse(Tape& tape, const nn::Mlp& critic, const Mat& inputs, const RowVec& targets);

/// Monte Carlo feasibility estimate F_hat(x) = (1/K) sum_k max_i Qc_i(x, a_k)
/// with a_k drawn fresh from the policy. Uses the online cost critics.
RowVec feasibility_estimate(const Mat& states, const PolicyHead& policy,
                            const CriticEnsemble& ens, int k_samples, std::mt19937_64& rng);

/// Same estimate recorded on a tape so gradients reach the policy through
/// the reparameterized actions; the critics stay frozen. Returns a 1 x B row
/// already shifted by the tolerance d (constraint reads F_hat - d <= 0).
Var feasibility_on_tape(Tape& tape, const Mat& states, const PolicyHead& policy,
                        const CriticEnsemble& ens, int k_samples, double tolerance_d,
                        std::mt19937_64& rng);

/// Deterministic variant with the normal draw supplied by the caller
/// (action_dim x B*K, sample blocks side by side).
Var feasibility_on_tape_with_eps(Tape& tape, const Mat& states, const PolicyHead& policy,
                                 const CriticEnsemble& ens, int k_samples, double tolerance_d,
                                 const Mat& eps);

/// SAC policy loss plus the augmented penalty terms supplied by the caller:
///   E[alpha log pi - min Q] (+ strategy terms added on the same tape).
/// Exposed pieces so the trainer can assemble agent variants; see Trainer.
Var sac_policy_objective(Tape& tape, const Mat& states, const PolicyHead& policy,
                         const CriticEnsemble& ens, double alpha, const Mat& eps,
                         RowVec* log_probs_out);

}  // namespace alam::rl
