#include "alam/harness/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "alam/harness/config.hpp"
#include "alam/nn/checkpoint.hpp"

namespace alam::harness {

namespace fs = std::filesystem;

RunSummary summarize_run(const std::string& run_dir, double final_fraction) {
  RunSummary s;
  s.dir = run_dir;
  const ExperimentConfig cfg = parse_experiment_file(run_dir + "/config.snapshot");
  s.agent = cfg.agent;
  s.env = cfg.env;
  s.seed = cfg.seeds.empty() ? 0 : cfg.seeds.back();

  const auto rows = read_metrics_csv(run_dir + "/metrics.csv");
  if (rows.empty()) throw std::runtime_error("summarize_run: no metric rows in " + run_dir);
  const long last_step = rows.back().env_step;
  const double cutoff = (1.0 - final_fraction) * static_cast<double>(last_step);
  double ret = 0.0, cost = 0.0;
  int n = 0;
  for (const auto& r : rows) {
    if (static_cast<double>(r.env_step) <= cutoff) continue;
    ret += r.episode_return;
    cost += r.episode_cost;
    ++n;
  }
  if (n == 0) throw std::runtime_error("summarize_run: empty final window in " + run_dir);
  s.final_return = ret / n;
  s.final_cost = cost / n;
  return s;
}

std::vector<std::string> discover_runs(const std::vector<std::string>& roots) {
  std::set<std::string> found;
  for (const auto& root : roots) {
    if (!fs::exists(root)) throw std::invalid_argument("discover_runs: no such path: " + root);
    if (fs::exists(root + "/metrics.csv")) {
      found.insert(root);
      continue;
    }
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().filename() == "metrics.csv")
        found.insert(entry.path().parent_path().string());
    }
  }
  return {found.begin(), found.end()};
}

double student_t_975(int n) {
  static constexpr double table[] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  const int dof = n - 1;
  if (dof < 1) return 0.0;
  if (dof <= 30) return table[dof - 1];
  return 1.96;
}

namespace {

struct MinMax {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void absorb(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  /// Degenerate spans map to the midpoint.
  double normalize(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.5; }
};

struct MeanCi {
  double mean = 0.0, ci = 0.0;
};

MeanCi mean_ci(const std::vector<double>& xs) {
  MeanCi r;
  const int n = static_cast<int>(xs.size());
  for (double x : xs) r.mean += x;
  r.mean /= n;
  if (n < 2) return r;
  double var = 0.0;
  for (double x : xs) var += (x - r.mean) * (x - r.mean);
  var /= (n - 1);
  r.ci = student_t_975(n) * std::sqrt(var / n);
  return r;
}

}  // namespace

std::vector<AgentAggregate> aggregate_normalized(const std::vector<RunSummary>& runs) {
  std::set<std::string> agents, envs;
  for (const auto& r : runs) {
    agents.insert(r.agent);
    envs.insert(r.env);
  }
  if (agents.size() < 2)
    throw std::invalid_argument(
        "aggregate: min-max normalization needs at least two agents (got " +
        std::to_string(agents.size()) + ")");

  std::map<std::string, MinMax> env_return, env_cost;
  for (const auto& r : runs) {
    env_return[r.env].absorb(r.final_return);
    env_cost[r.env].absorb(r.final_cost);
  }

  // per (agent, seed): cross-environment mean of normalized finals
  std::map<std::string, std::map<std::uint64_t, std::vector<double>>> ret_parts, cost_parts;
  for (const auto& r : runs) {
    ret_parts[r.agent][r.seed].push_back(env_return[r.env].normalize(r.final_return));
    cost_parts[r.agent][r.seed].push_back(env_cost[r.env].normalize(r.final_cost));
  }

  std::vector<AgentAggregate> out;
  for (const auto& agent : agents) {
    AgentAggregate a;
    a.agent = agent;
    std::vector<double> per_seed_ret, per_seed_cost;
    for (const auto& [seed, vals] : ret_parts[agent]) {
      double m = 0.0;
      for (double v : vals) m += v;
      per_seed_ret.push_back(m / vals.size());
    }
    for (const auto& [seed, vals] : cost_parts[agent]) {
      double m = 0.0;
      for (double v : vals) m += v;
      per_seed_cost.push_back(m / vals.size());
    }
    a.n_seeds = static_cast<int>(per_seed_ret.size());
    const MeanCi mr = mean_ci(per_seed_ret);
    const MeanCi mc = mean_ci(per_seed_cost);
    a.mean_norm_return = mr.mean;
    a.ci_return = mr.ci;
    a.mean_norm_cost = mc.mean;
    a.ci_cost = mc.ci;
    out.push_back(a);
  }
  return out;
}

std::string aggregate_table(const std::vector<AgentAggregate>& agg) {
  std::ostringstream os;
  os << "agent,n_seeds,norm_return_mean,norm_return_ci95,norm_cost_mean,norm_cost_ci95\n";
  os.precision(6);
  for (const auto& a : agg)
    os << a.agent << ',' << a.n_seeds << ',' << a.mean_norm_return << ',' << a.ci_return << ','
       << a.mean_norm_cost << ',' << a.ci_cost << '\n';
  return os.str();
}

double oscillation_metric(const std::vector<double>& series, int window) {
  const int n = static_cast<int>(series.size());
  if (window < 2) throw std::invalid_argument("oscillation_metric: window must be >= 2");
  if (n <= window)
    throw std::invalid_argument("oscillation_metric: series must be longer than the window");
  const int half_start = n / 2;
  double acc = 0.0;
  int count = 0;
  for (int end = std::max(window - 1, half_start); end < n; ++end) {
    double mean = 0.0;
    for (int i = end - window + 1; i <= end; ++i) mean += series[i];
    mean /= window;
    double var = 0.0;
    for (int i = end - window + 1; i <= end; ++i)
      var += (series[i] - mean) * (series[i] - mean);
    var /= (window - 1);
    acc += std::sqrt(var);
    ++count;
  }
  return acc / count;
}

double run_cost_oscillation(const std::string& run_dir, int window) {
  const auto rows = read_metrics_csv(run_dir + "/metrics.csv");
  std::vector<double> costs;
  costs.reserve(rows.size());
  for (const auto& r : rows) costs.push_back(r.episode_cost);
  return oscillation_metric(costs, window);
}

void export_lambda_heatmap(const std::string& checkpoint_path, int state_dim,
                           const HeatmapSpec& spec, const std::string& out_csv) {
  if (spec.dim_x == spec.dim_y || spec.dim_x < 0 || spec.dim_y < 0 ||
      spec.dim_x >= state_dim || spec.dim_y >= state_dim)
    throw std::invalid_argument("heatmap: need two distinct in-range grid dimensions");
  if (spec.resolution < 1) throw std::invalid_argument("heatmap: resolution must be >= 1");

  const auto ck = nn::load_checkpoint(checkpoint_path);
  if (!ck.has("lambda"))
    throw std::invalid_argument("heatmap: checkpoint has no multiplier network");
  std::mt19937_64 scratch_rng(0);
  nn::Mlp lambda_net(ck.config_of("lambda"), scratch_rng);
  ck.restore("lambda", lambda_net);
  if (lambda_net.config().input_dim != state_dim)
    throw std::invalid_argument("heatmap: state dim does not match the checkpoint");

  Eigen::VectorXd base = Eigen::VectorXd::Zero(state_dim);
  for (const auto& [dim, value] : spec.fixed) {
    if (dim < 0 || dim >= state_dim) throw std::invalid_argument("heatmap: bad fixed dim");
    base(dim) = value;
  }

  std::ofstream out(out_csv, std::ios::trunc);
  if (!out) throw std::runtime_error("heatmap: cannot open " + out_csv);
  out << "x1,x2,lambda\n";
  out.precision(10);
  const int res = spec.resolution;
  for (int iy = 0; iy < res; ++iy) {
    for (int ix = 0; ix < res; ++ix) {
      const double x = res > 1 ? spec.x_min + (spec.x_max - spec.x_min) * ix / (res - 1)
                               : 0.5 * (spec.x_min + spec.x_max);
      const double y = res > 1 ? spec.y_min + (spec.y_max - spec.y_min) * iy / (res - 1)
                               : 0.5 * (spec.y_min + spec.y_max);
      Eigen::VectorXd state = base;
      state(spec.dim_x) = x;
      state(spec.dim_y) = y;
      out << x << ',' << y << ',' << lambda_net.forward(state)(0) << '\n';
    }
  }
}

}  // namespace alam::harness
