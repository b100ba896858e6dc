#include "alam/env/environments.hpp"

#include <cmath>
#include <stdexcept>

namespace alam::env {

StepResult Environment::step(const Vec& state, const Vec& action, int t) const {
  const EnvSpec& sp = spec();
  if (state.size() != sp.state_dim) throw std::invalid_argument(id() + ": state dim mismatch");
  if (action.size() != sp.action_dim) throw std::invalid_argument(id() + ": action dim mismatch");
  if (!action.allFinite()) throw std::runtime_error(id() + ": non-finite action");
  const Vec a = action.cwiseMax(sp.action_low).cwiseMin(sp.action_high);

  StepResult r;
  r.next_state = dynamics(state, a);
  r.reward = reward(state, a, r.next_state);
  r.h_value = h(r.next_state);
  r.cost = r.h_value > 0.0 ? 1.0 : 0.0;
  r.done = t + 1 >= sp.horizon;
  return r;
}

// ---------------------------------------------------------------- DoubleIntegrator

DoubleIntegrator::DoubleIntegrator() {
  spec_.state_dim = 2;
  spec_.action_dim = 1;
  spec_.action_low = Vec::Constant(1, -2.0);
  spec_.action_high = Vec::Constant(1, 2.0);
  spec_.horizon = 200;
  spec_.dt = 0.05;
}

Vec DoubleIntegrator::reset(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Vec s(2);
  s << u(rng), 0.0;
  return s;
}

double DoubleIntegrator::h(const Vec& s) const { return std::abs(s(0)) - 1.0; }

Vec DoubleIntegrator::dynamics(const Vec& s, const Vec& a) const {
  Vec n(2);
  n(0) = s(0) + spec_.dt * s(1);
  n(1) = s(1) + spec_.dt * a(0);
  return n;
}

double DoubleIntegrator::reward(const Vec&, const Vec& a, const Vec& n) const {
  return -n(0) * n(0) - 0.1 * a(0) * a(0);
}

std::unique_ptr<Environment> DoubleIntegrator::clone() const {
  return std::make_unique<DoubleIntegrator>(*this);
}

// ---------------------------------------------------------------- PointGoalHazards

std::vector<Hazard> PointGoalHazards::default_hazards() {
  return {{0.0, 0.0, 0.45}, {0.0, 1.1, 0.45}, {0.0, -1.1, 0.45}};
}

PointGoalHazards::PointGoalHazards() : PointGoalHazards(default_hazards()) {}

PointGoalHazards::PointGoalHazards(std::vector<Hazard> hazards) : hazards_(std::move(hazards)) {
  spec_.state_dim = 4;
  spec_.action_dim = 2;
  spec_.action_low = Vec::Constant(2, -1.0);
  spec_.action_high = Vec::Constant(2, 1.0);
  spec_.horizon = 400;
  spec_.dt = 0.1;
}

Vec PointGoalHazards::reset(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  Vec s(4);
  s << -1.5 + u(rng), u(rng), 0.0, 0.0;
  return s;
}

double PointGoalHazards::h(const Vec& s) const {
  double worst = -1e30;
  for (const Hazard& hz : hazards_) {
    const double d = std::hypot(s(0) - hz.cx, s(1) - hz.cy);
    worst = std::max(worst, hz.radius - d);
  }
  return worst;
}

Vec PointGoalHazards::dynamics(const Vec& s, const Vec& a) const {
  Vec n(4);
  n(0) = s(0) + spec_.dt * s(2);
  n(1) = s(1) + spec_.dt * s(3);
  n(2) = (1.0 - damping_) * s(2) + spec_.dt * a(0);
  n(3) = (1.0 - damping_) * s(3) + spec_.dt * a(1);
  return n;
}

double PointGoalHazards::reward(const Vec& s, const Vec& a, const Vec& n) const {
  const double dist_before = std::hypot(s(0) - goal_x_, s(1) - goal_y_);
  const double dist_after = std::hypot(n(0) - goal_x_, n(1) - goal_y_);
  return progress_gain_ * (dist_before - dist_after) - ctrl_cost_ * a.squaredNorm();
}

std::unique_ptr<Environment> PointGoalHazards::clone() const {
  return std::make_unique<PointGoalHazards>(*this);
}

// ---------------------------------------------------------------- PointCircle

PointCircle::PointCircle() {
  spec_.state_dim = 4;
  spec_.action_dim = 2;
  spec_.action_low = Vec::Constant(2, -1.0);
  spec_.action_high = Vec::Constant(2, 1.0);
  spec_.horizon = 300;
  spec_.dt = 0.1;
}

Vec PointCircle::reset(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Vec s(4);
  s << u(rng), u(rng), 0.0, 0.0;
  return s;
}

double PointCircle::h(const Vec& s) const { return std::abs(s(0)) - x_lim_; }

Vec PointCircle::dynamics(const Vec& s, const Vec& a) const {
  Vec n(4);
  n(0) = s(0) + spec_.dt * s(2);
  n(1) = s(1) + spec_.dt * s(3);
  n(2) = (1.0 - damping_) * s(2) + spec_.dt * a(0);
  n(3) = (1.0 - damping_) * s(3) + spec_.dt * a(1);
  return n;
}

double PointCircle::reward(const Vec&, const Vec&, const Vec& n) const {
  // tangential speed around the origin, discounted by distance from the
  // target radius (the safety-gym circle objective)
  const double tangential = -n(1) * n(2) + n(0) * n(3);
  const double off_radius = std::abs(std::hypot(n(0), n(1)) - radius_);
  return tangential / (1.0 + off_radius);
}

std::unique_ptr<Environment> PointCircle::clone() const {
  return std::make_unique<PointCircle>(*this);
}

// ---------------------------------------------------------------- factory & rollout

std::unique_ptr<Environment> make_environment(const std::string& id,
                                              const std::vector<double>& hazards) {
  if (id == "double-integrator") return std::make_unique<DoubleIntegrator>();
  if (id == "point-goal") {
    if (hazards.empty()) return std::make_unique<PointGoalHazards>();
    if (hazards.size() % 3 != 0)
      throw std::invalid_argument("point-goal hazards must be (x, y, r) triples");
    std::vector<Hazard> hz;
    for (size_t i = 0; i < hazards.size(); i += 3)
      hz.push_back({hazards[i], hazards[i + 1], hazards[i + 2]});
    return std::make_unique<PointGoalHazards>(std::move(hz));
  }
  if (id == "point-circle") return std::make_unique<PointCircle>();
  throw std::invalid_argument("unknown environment id: " + id);
}

std::vector<EpisodeStats> rollout(const Environment& env, const PolicyFn& policy,
                                  int episodes, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::vector<EpisodeStats> out;
  out.reserve(episodes);
  const int horizon = env.spec().horizon;
  for (int e = 0; e < episodes; ++e) {
    EpisodeStats st;
    st.max_h = -std::numeric_limits<double>::infinity();
    Vec x = env.reset(rng);
    int violations = 0;
    for (int t = 0; t < horizon; ++t) {
      const StepResult r = env.step(x, policy(x), t);
      st.episode_return += r.reward;
      st.total_cost += r.cost;
      st.max_h = std::max(st.max_h, r.h_value);
      if (r.h_value > 0.0) ++violations;
      x = r.next_state;
    }
    st.violation_fraction = static_cast<double>(violations) / horizon;
    out.push_back(st);
  }
  return out;
}

}  // namespace alam::env
