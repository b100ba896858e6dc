#include "alam/rl/critics.hpp"

#include <stdexcept>

namespace alam::rl {

CriticEnsemble::CriticEnsemble(int state_dim, int action_dim, const std::vector<int>& hidden,
                               std::mt19937_64& rng)
    : q1(nn::MlpConfig{state_dim + action_dim, 1, hidden, nn::OutputMap::kIdentity}, rng),
      q2(nn::MlpConfig{state_dim + action_dim, 1, hidden, nn::OutputMap::kIdentity}, rng),
      qc1(nn::MlpConfig{state_dim + action_dim, 1, hidden, nn::OutputMap::kSoftplus}, rng),
      qc2(nn::MlpConfig{state_dim + action_dim, 1, hidden, nn::OutputMap::kSoftplus}, rng),
      tq1(q1),
      tq2(q2),
      tqc1(qc1),
      tqc2(qc2) {}

void CriticEnsemble::soft_update_targets(double tau) {
  nn::soft_update(tq1, q1, tau);
  nn::soft_update(tq2, q2, tau);
  nn::soft_update(tqc1, qc1, tau);
  nn::soft_update(tqc2, qc2, tau);
}

namespace {

Mat stack_inputs(const Mat& states, const Mat& actions) {
  Mat x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

void check_batch(const TrainBatch& batch) {
  if (batch.states.cols() == 0) throw std::invalid_argument("critics: empty batch");
}

}  // namespace

RowVec reward_targets_with_actions(const TrainBatch& batch, const CriticEnsemble& ens,
                                   const Mat& next_actions, const RowVec& next_log_probs,
                                   double alpha, double gamma) {
  check_batch(batch);
  const Mat x2 = stack_inputs(batch.next_states, next_actions);
  const RowVec qmin = ens.tq1.forward(x2).row(0).cwiseMin(ens.tq2.forward(x2).row(0));
  return batch.rewards + gamma * (qmin - alpha * next_log_probs);
}

RowVec cost_targets_with_actions(const TrainBatch& batch, const CriticEnsemble& ens,
                                 const Mat& next_actions, double gamma) {
  check_batch(batch);
  const Mat x2 = stack_inputs(batch.next_states, next_actions);
  const RowVec qmax = ens.tqc1.forward(x2).row(0).cwiseMax(ens.tqc2.forward(x2).row(0));
  return batch.costs_at_state + gamma * qmax;
}

RowVec reward_targets(const TrainBatch& batch, const CriticEnsemble& ens,
                      const PolicyHead& policy, double alpha, double gamma,
                      std::mt19937_64& rng) {
  const auto sb = policy.sample_batch(batch.next_states, rng);
  return reward_targets_with_actions(batch, ens, sb.actions, sb.log_prob, alpha, gamma);
}

RowVec cost_targets(const TrainBatch& batch, const CriticEnsemble& ens,
                    const PolicyHead& policy, double gamma, std::mt19937_64& rng) {
  const auto sb = policy.sample_batch(batch.next_states, rng);
  return cost_targets_with_actions(batch, ens, sb.actions, gamma);
}

Var critic_mse(Tape& tape, const nn::Mlp& critic, const Mat& inputs, const RowVec& targets) {
  if (inputs.cols() == 0) throw std::invalid_argument("critic_mse: empty batch");
  if (targets.size() != inputs.cols())
    throw std::invalid_argument("critic_mse: target size mismatch");
  Var pred = critic.forward(tape, tape.constant(inputs), /*train=*/true);
  return tape.mean_all(tape.square(tape.sub(pred, tape.constant(targets))));
}

RowVec feasibility_estimate(const Mat& states, const PolicyHead& policy,
                            const CriticEnsemble& ens, int k_samples, std::mt19937_64& rng) {
  if (k_samples < 1) throw std::invalid_argument("feasibility: K must be >= 1");
  const Eigen::Index b = states.cols();
  RowVec acc = RowVec::Zero(b);
  for (int k = 0; k < k_samples; ++k) {
    const auto sb = policy.sample_batch(states, rng);
    const Mat x = stack_inputs(states, sb.actions);
    acc += ens.qc1.forward(x).row(0).cwiseMax(ens.qc2.forward(x).row(0));
  }
  return acc / static_cast<double>(k_samples);
}

Var feasibility_on_tape(Tape& tape, const Mat& states, const PolicyHead& policy,
                        const CriticEnsemble& ens, int k_samples, double tolerance_d,
                        std::mt19937_64& rng) {
  if (k_samples < 1) throw std::invalid_argument("feasibility: K must be >= 1");
  const int a_dim = policy.action_dim();
  Mat eps(a_dim, states.cols() * k_samples);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < eps.cols(); ++j)
    for (int i = 0; i < a_dim; ++i) eps(i, j) = normal(rng);
  return feasibility_on_tape_with_eps(tape, states, policy, ens, k_samples, tolerance_d, eps);
}

Var feasibility_on_tape_with_eps(Tape& tape, const Mat& states, const PolicyHead& policy,
                                 const CriticEnsemble& ens, int k_samples, double tolerance_d,
                                 const Mat& eps) {
  if (k_samples < 1) throw std::invalid_argument("feasibility: K must be >= 1");
  const Eigen::Index b = states.cols();
  if (eps.rows() != policy.action_dim() || eps.cols() != b * k_samples)
    throw std::invalid_argument("feasibility: eps shape mismatch");

  Mat tiled_states(states.rows(), b * k_samples);
  for (int k = 0; k < k_samples; ++k) tiled_states.middleCols(k * b, b) = states;

  Var states_c = tape.constant(std::move(tiled_states));
  auto sample = policy.sample_on_tape(tape, states_c, eps);
  Var x = tape.vcat(states_c, sample.actions);
  Var qc1 = ens.qc1.forward(tape, x, /*train=*/false);
  Var qc2 = ens.qc2.forward(tape, x, /*train=*/false);
  Var fhat = tape.block_mean_cols(tape.cmax(qc1, qc2), k_samples);
  return tape.add_scalar(fhat, -tolerance_d);
}

Var sac_policy_objective(Tape& tape, const Mat& states, const PolicyHead& policy,
                         const CriticEnsemble& ens, double alpha, const Mat& eps,
                         RowVec* log_probs_out) {
  if (states.cols() == 0) throw std::invalid_argument("policy objective: empty batch");
  Var states_c = tape.constant(states);
  auto sample = policy.sample_on_tape(tape, states_c, eps);
  Var x = tape.vcat(states_c, sample.actions);
  Var q1 = ens.q1.forward(tape, x, /*train=*/false);
  Var q2 = ens.q2.forward(tape, x, /*train=*/false);
  Var qmin = tape.cmin(q1, q2);
  Var loss = tape.mean_all(tape.sub(tape.scale(sample.log_prob, alpha), qmin));
  if (log_probs_out) *log_probs_out = tape.value(sample.log_prob).row(0);
  return loss;
}

}  // namespace alam::rl
