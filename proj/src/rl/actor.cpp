#include "alam/rl/actor.hpp"

#include <cmath>
#include <stdexcept>

namespace alam::rl {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)
constexpr double kSquashEps = 1e-6;
}  // namespace

Temperature::Temperature(double alpha_init, double target_entropy_)
    : target_entropy(target_entropy_) {
  if (alpha_init <= 0.0) throw std::invalid_argument("temperature: alpha_init must be > 0");
  log_alpha.name = "log_alpha";
  log_alpha.value.resize(1, 1);
  log_alpha.value(0, 0) = std::log(alpha_init);
}

PolicyHead::PolicyHead(int state_dim, const std::vector<int>& hidden, const Vec& action_low,
                       const Vec& action_high, std::mt19937_64& rng)
    : net_(nn::MlpConfig{state_dim, 2 * static_cast<int>(action_low.size()), hidden,
                         nn::OutputMap::kIdentity},
           rng),
      low_(action_low),
      high_(action_high) {
  if (action_low.size() != action_high.size() || action_low.size() == 0)
    throw std::invalid_argument("policy: bad action bounds");
  if (((action_high - action_low).array() <= 0.0).any())
    throw std::invalid_argument("policy: bounds must satisfy low < high");
  scale_ = 0.5 * (high_ - low_);
  center_ = 0.5 * (high_ + low_);
}

std::pair<Vec, double> PolicyHead::sample(const Vec& state, std::mt19937_64& rng) const {
  const int a_dim = action_dim();
  Mat eps(a_dim, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < a_dim; ++i) eps(i, 0) = normal(rng);

  const Vec out = net_.forward(state);
  double log_prob = 0.0;
  Vec action(a_dim);
  for (int i = 0; i < a_dim; ++i) {
    const double mean = out(i);
    const double log_std = std::clamp(out(a_dim + i), kLogStdMin, kLogStdMax);
    const double std = std::exp(log_std);
    const double u = mean + std * eps(i, 0);
    const double th = std::tanh(u);
    action(i) = center_(i) + scale_(i) * th;
    log_prob += -0.5 * eps(i, 0) * eps(i, 0) - kHalfLog2Pi - log_std -
                std::log(scale_(i) * (1.0 - th * th) + kSquashEps);
  }
  return {action, log_prob};
}

Vec PolicyHead::mean_action(const Vec& state) const {
  const Vec out = net_.forward(state);
  const int a_dim = action_dim();
  Vec action(a_dim);
  for (int i = 0; i < a_dim; ++i) action(i) = center_(i) + scale_(i) * std::tanh(out(i));
  return action;
}

PolicyHead::SampleBatch PolicyHead::sample_batch(const Mat& states, std::mt19937_64& rng) const {
  const int a_dim = action_dim();
  const Eigen::Index b = states.cols();
  Mat eps(a_dim, b);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < b; ++j)
    for (int i = 0; i < a_dim; ++i) eps(i, j) = normal(rng);

  const Mat out = net_.forward(states);
  SampleBatch sb;
  sb.actions.resize(a_dim, b);
  sb.log_prob = RowVec::Zero(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    for (int i = 0; i < a_dim; ++i) {
      const double mean = out(i, j);
      const double log_std = std::clamp(out(a_dim + i, j), kLogStdMin, kLogStdMax);
      const double std = std::exp(log_std);
      const double u = mean + std * eps(i, j);
      const double th = std::tanh(u);
      sb.actions(i, j) = center_(i) + scale_(i) * th;
      sb.log_prob(j) += -0.5 * eps(i, j) * eps(i, j) - kHalfLog2Pi - log_std -
                        std::log(scale_(i) * (1.0 - th * th) + kSquashEps);
    }
  }
  return sb;
}

PolicyHead::SampleNode PolicyHead::sample_on_tape(Tape& tape, Var states, const Mat& eps) const {
  const int a_dim = action_dim();
  if (eps.rows() != a_dim || eps.cols() != tape.value(states).cols())
    throw std::invalid_argument("policy: eps shape mismatch");

  Var out = net_.forward(tape, states, /*train=*/true);
  Var mean = tape.rows(out, 0, a_dim);
  Var log_std = tape.clamp(tape.rows(out, a_dim, a_dim), kLogStdMin, kLogStdMax);
  Var std = tape.exp(log_std);
  Var eps_c = tape.constant(eps);
  Var u = tape.add(mean, tape.mul(std, eps_c));
  Var squashed = tape.tanh(u);
  Var actions = tape.add(tape.scale_rows(squashed, scale_),
                         tape.constant(center_ * Eigen::RowVectorXd::Ones(eps.cols())));

  // log N(u; mean, std) - log |d action / d u|
  Mat gauss_const = (-0.5 * eps.array().square() - kHalfLog2Pi).matrix();
  Var jac = tape.log(tape.add_scalar(
      tape.scale_rows(tape.add_scalar(tape.neg(tape.square(squashed)), 1.0), scale_),
      kSquashEps));
  Var per_dim = tape.sub(tape.sub(tape.constant(std::move(gauss_const)), log_std), jac);
  return {actions, tape.colwise_sum(per_dim)};
}

Var temperature_loss(Tape& tape, Temperature& temperature, const RowVec& log_probs) {
  if (log_probs.size() == 0) throw std::invalid_argument("temperature_loss: empty batch");
  Var alpha = tape.exp(tape.param(temperature.log_alpha));
  const double mean_neg_ent_gap = (-log_probs.array() - temperature.target_entropy).mean();
  return tape.mul(alpha, tape.constant_scalar(mean_neg_ent_gap));
}

}  // namespace alam::rl
