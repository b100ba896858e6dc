#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace alam::env {

using Vec = Eigen::VectorXd;

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  Vec action_low;
  Vec action_high;
  int horizon = 0;
  double dt = 0.0;
};

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  double cost = 0.0;     // 1{h(next_state) > 0}
  double h_value = 0.0;  // h(next_state)
  bool done = false;     // horizon reached, never earlier
};

/// Deterministic control environment. step() is a pure function of
/// (state, action, t); the only randomness lives in reset(). Reward, cost
/// and h are reported for the resulting state. Actions outside the bounds
/// are clipped; non-finite actions abort the run.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual const std::string& id() const = 0;
  virtual Vec reset(std::mt19937_64& rng) const = 0;
  virtual double h(const Vec& state) const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  StepResult step(const Vec& state, const Vec& action, int t) const;

 protected:
  /// Dynamics x' = f(x, a) with a already clipped, plus the reward for the
  /// transition (evaluated at the resulting state).
  virtual Vec dynamics(const Vec& state, const Vec& action) const = 0;
  virtual double reward(const Vec& state, const Vec& action, const Vec& next_state) const = 0;
};

/// p' = p + dt*v, v' = v + dt*a; r = -p^2 - 0.1 a^2; h = |p| - 1.
class DoubleIntegrator final : public Environment {
 public:
  DoubleIntegrator();
  const EnvSpec& spec() const override { return spec_; }
  const std::string& id() const override { return id_; }
  Vec reset(std::mt19937_64& rng) const override;
  double h(const Vec& state) const override;
  std::unique_ptr<Environment> clone() const override;

 protected:
  Vec dynamics(const Vec& state, const Vec& action) const override;
  double reward(const Vec& state, const Vec& action, const Vec& next_state) const override;

 private:
  EnvSpec spec_;
  std::string id_ = "double-integrator";
};

struct Hazard {
  double cx = 0.0, cy = 0.0, radius = 0.0;
};

/// 2D point mass steered by force toward a fixed goal; circular hazards.
/// State (px, py, vx, vy). Reward is progress toward the goal minus a small
/// control cost; h(x) = max_i (r_i - dist(p, c_i)).
class PointGoalHazards final : public Environment {
 public:
  PointGoalHazards();
  explicit PointGoalHazards(std::vector<Hazard> hazards);
  const EnvSpec& spec() const override { return spec_; }
  const std::string& id() const override { return id_; }
  Vec reset(std::mt19937_64& rng) const override;
  double h(const Vec& state) const override;
  std::unique_ptr<Environment> clone() const override;

  const std::vector<Hazard>& hazards() const { return hazards_; }
  static std::vector<Hazard> default_hazards();

 protected:
  Vec dynamics(const Vec& state, const Vec& action) const override;
  double reward(const Vec& state, const Vec& action, const Vec& next_state) const override;

 private:
  EnvSpec spec_;
  std::string id_ = "point-goal";
  std::vector<Hazard> hazards_;
  double goal_x_ = 1.5, goal_y_ = 0.0;
  double damping_ = 0.05;
  double progress_gain_ = 10.0;
  double ctrl_cost_ = 0.01;
};

/// 2D point mass rewarded for tangential speed along a circle of radius R,
/// constrained to |px| <= x_lim. State (px, py, vx, vy).
class PointCircle final : public Environment {
 public:
  PointCircle();
  const EnvSpec& spec() const override { return spec_; }
  const std::string& id() const override { return id_; }
  Vec reset(std::mt19937_64& rng) const override;
  double h(const Vec& state) const override;
  std::unique_ptr<Environment> clone() const override;

  double circle_radius() const { return radius_; }
  double x_limit() const { return x_lim_; }

 protected:
  Vec dynamics(const Vec& state, const Vec& action) const override;
  double reward(const Vec& state, const Vec& action, const Vec& next_state) const override;

 private:
  EnvSpec spec_;
  std::string id_ = "point-circle";
  double radius_ = 1.2;
  double x_lim_ = 0.9;
  double damping_ = 0.05;
};

/// Environment ids accepted by the CLI: double-integrator, point-goal,
/// point-circle. `hazards` (x, y, r triples) overrides the point-goal layout.
std::unique_ptr<Environment> make_environment(const std::string& id,
                                              const std::vector<double>& hazards = {});

struct EpisodeStats {
  double episode_return = 0.0;
  double total_cost = 0.0;
  double max_h = 0.0;
  double violation_fraction = 0.0;
};

using PolicyFn = std::function<Vec(const Vec&)>;

/// Runs full episodes under `policy`, undiscounted sums.
std::vector<EpisodeStats> rollout(const Environment& env, const PolicyFn& policy,
                                  int episodes, std::uint64_t rng_seed);

}  // namespace alam::env
