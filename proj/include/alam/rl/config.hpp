#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace alam::rl {

enum class AgentKind { kSac, kSacLag, kSacLagNet, kSacAlam, kSacAlamGa };

std::string agent_name(AgentKind k);
AgentKind agent_from_name(const std::string& s);

/// Training hyperparameters. Defaults follow the reference recipe; the
/// harness config file and CLI flags override individual fields.
struct AgentConfig {
  double gamma = 0.99;
  std::vector<int> hidden = {256, 256};
  double lr = 1e-4;
  double multiplier_lr = 1e-5;
  long total_steps = 100000;
  long buffer_capacity = 2000000;
  int batch_size = 256;
  /// NaN means "use -dim(A)".
  double target_entropy = std::nan("");
  int multiplier_interval = 200;  // policy steps between dual updates
  int mc_samples = 5;             // K actions for the feasibility estimate
  int dual_steps = 5;
  double rho_max = 5.0;
  double sigma = 1.01;
  double rho0 = 1.0;
  double tolerance_d = 0.1;  // constraint reads F(x) - d <= 0
  double tau = 0.005;
  int grad_steps_per_env_step = 1;
  long warmup_steps = 5000;
  long eval_interval = 5000;
  int eval_episodes = 20;
  double sac_lag_lr = 3e-3;  // scalar-multiplier ascent rate
  double alpha_init = 0.2;
  double multiplier_init = 0.05;

  void validate() const;
};

}  // namespace alam::rl
