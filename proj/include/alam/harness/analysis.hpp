#pragma once

#include <map>
#include <string>
#include <vector>

#include "alam/harness/logging.hpp"

namespace alam::harness {

/// Final-10%-of-training averages for one completed run.
struct RunSummary {
  std::string agent;
  std::string env;
  std::uint64_t seed = 0;
  std::string dir;
  double final_return = 0.0;
  double final_cost = 0.0;
};

/// Reads metrics.csv + config.snapshot of one run directory.
RunSummary summarize_run(const std::string& run_dir, double final_fraction = 0.1);

/// Recursively finds run directories (presence of metrics.csv) under roots.
std::vector<std::string> discover_runs(const std::vector<std::string>& roots);

struct AgentAggregate {
  std::string agent;
  int n_seeds = 0;
  double mean_norm_return = 0.0, ci_return = 0.0;
  double mean_norm_cost = 0.0, ci_cost = 0.0;
};

/// Min-max normalized cross-environment aggregation: per env, min-max over
/// every (agent, seed) final average; per seed, mean across envs; per agent,
/// mean with a Student-t 95% CI over seeds. Requires at least two agents.
std::vector<AgentAggregate> aggregate_normalized(const std::vector<RunSummary>& runs);

std::string aggregate_table(const std::vector<AgentAggregate>& agg);

/// Two-sided 95% Student-t quantile for n samples (n-1 dof).
double student_t_975(int n);

/// Mean over the second half of the series of the rolling sample standard
/// deviation (windows of `window` points). Errors when the series is not
/// longer than the window.
double oscillation_metric(const std::vector<double>& series, int window = 10);

/// Episode-cost oscillation of a finished run.
double run_cost_oscillation(const std::string& run_dir, int window = 10);

struct HeatmapSpec {
  int dim_x = 0, dim_y = 1;          // free state dimensions
  double x_min = -2.5, x_max = 2.5;
  double y_min = -2.5, y_max = 2.5;
  int resolution = 61;
  std::map<int, double> fixed;       // remaining dims -> value
};

/// Evaluates the multiplier network of a checkpoint over a 2-D state grid
/// and writes rows `x1,x2,lambda`. The checkpoint is opened read-only.
void export_lambda_heatmap(const std::string& checkpoint_path, int state_dim,
                           const HeatmapSpec& spec, const std::string& out_csv);

}  // namespace alam::harness
