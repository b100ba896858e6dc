#include "alam/rl/multiplier.hpp"

#include <cmath>
#include <stdexcept>

namespace alam::rl {

double slack(double lam, double f_val, double rho) {
  if (rho <= 0.0) throw std::invalid_argument("slack: rho must be > 0");
  if (lam < 0.0) throw std::invalid_argument("slack: lambda must be >= 0");
  return std::max(-lam / rho - f_val, 0.0);
}

double dual_target(double lam, double f_val, double rho) {
  if (rho <= 0.0) throw std::invalid_argument("dual_target: rho must be > 0");
  if (lam < 0.0) throw std::invalid_argument("dual_target: lambda must be >= 0");
  return std::max(lam + rho * f_val, 0.0);
}

PenaltyState::PenaltyState(double rho0_, double sigma_, double rho_max_)
    : rho(rho0_), sigma(sigma_), rho_max(rho_max_), rho0(rho0_) {
  if (rho0 <= 0.0) throw std::invalid_argument("penalty: rho0 must be > 0");
  if (sigma <= 1.0) throw std::invalid_argument("penalty: sigma must be > 1");
  if (rho_max < rho0) throw std::invalid_argument("penalty: rho_max must be >= rho0");
}

bool PenaltyState::update(double violation) {
  if (violation <= 1.0 / rho) return false;
  rho = std::min(sigma * rho, rho_max);
  return true;
}

MultiplierNet::MultiplierNet(int state_dim, const std::vector<int>& hidden,
                             std::mt19937_64& rng, double initial_value)
    : net_(nn::MlpConfig{state_dim, 1, hidden, nn::OutputMap::kSoftplus}, rng) {
  net_.set_constant_output(initial_value);
}

RowVec MultiplierNet::values(const Mat& states) const { return net_.forward(states).row(0); }

double MultiplierNet::value(const nn::Vec& state) const { return net_.forward(state)(0); }

Var MultiplierNet::forward(Tape& tape, Var states, bool train) const {
  return net_.forward(tape, states, train);
}

double multiplier_regression_cycle(MultiplierNet& multiplier, nn::Adam& optimizer,
                                   const StateSampler& sample_states,
                                   const FeasibilityFn& feasibility, double rho, int n_steps,
                                   Tape& tape) {
  if (n_steps < 1) throw std::invalid_argument("dual update: n_steps must be >= 1");
  double last_loss = 0.0;
  for (int s = 0; s < n_steps; ++s) {
    const Mat states = sample_states();
    const RowVec fhat = feasibility(states);
    // stop-gradient target from the live network
    const RowVec lam_now = multiplier.values(states);
    const RowVec target = (lam_now + rho * fhat).cwiseMax(0.0);

    tape.reset();
    Var lam = multiplier.forward(tape, tape.constant(states), /*train=*/true);
    Var loss = tape.mean_all(tape.square(tape.sub(lam, tape.constant(target))));
    last_loss = tape.backward(loss);
    optimizer.step(tape);
  }
  return last_loss;
}

double violation_metric(const Mat& states, const MultiplierNet& multiplier,
                        const FeasibilityFn& feasibility, double rho) {
  if (states.cols() == 0) throw std::invalid_argument("violation_metric: empty batch");
  if (rho <= 0.0) throw std::invalid_argument("violation_metric: rho must be > 0");
  const RowVec fhat = feasibility(states);
  const RowVec lam = multiplier.values(states);
  const RowVec terms = fhat.cwiseMax(-lam / rho);
  return std::sqrt(terms.array().square().mean());
}

}  // namespace alam::rl
