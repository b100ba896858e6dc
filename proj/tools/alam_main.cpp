#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "alam/harness/analysis.hpp"
#include "alam/harness/experiment.hpp"
#include "alam/nn/checkpoint.hpp"
#include "alam/selftest.hpp"
#include "alam/toy/convex.hpp"

namespace {

using alam::harness::ExperimentConfig;

struct KeyOverride {
  std::string key, value;
};

std::vector<KeyOverride> parse_overrides(const std::vector<std::string>& raw) {
  std::vector<KeyOverride> out;
  for (const auto& kv : raw) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set expects key=value, got: " + kv);
    out.push_back({kv.substr(0, eq), kv.substr(eq + 1)});
  }
  return out;
}

int cmd_train(const std::string& config_path, const std::string& agent, const std::string& env,
              const std::string& seeds, long steps, const std::string& out, bool force,
              bool resume, const std::vector<std::string>& sets) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = alam::harness::parse_experiment_file(config_path);
  if (!agent.empty()) cfg.agent = agent;
  if (!env.empty()) cfg.env = env;
  if (!seeds.empty()) {
    cfg.seeds.clear();
    std::stringstream ss(seeds);
    std::string tok;
    while (std::getline(ss, tok, ',')) cfg.seeds.push_back(std::stoull(tok));
  }
  if (steps > 0) cfg.agent_config.total_steps = steps;
  if (!out.empty()) cfg.out_dir = out;
  cfg.force = cfg.force || force;
  cfg.resume = cfg.resume || resume;
  for (const auto& kv : parse_overrides(sets))
    alam::harness::apply_config_key(cfg, kv.key, kv.value);

  const auto outcomes = alam::harness::run_experiment(cfg);
  std::cout << "wrote " << outcomes.size() << " run(s) under " << cfg.out_dir << "\n";
  return 0;
}

int cmd_evaluate(const std::string& ckpt, const std::string& env_id, int episodes,
                 std::uint64_t seed, const std::vector<double>& hazards) {
  const auto env = alam::env::make_environment(env_id, hazards);
  const auto ck = alam::nn::load_checkpoint(ckpt);

  std::mt19937_64 scratch(0);
  alam::nn::Mlp policy_net(ck.config_of("policy"), scratch);
  ck.restore("policy", policy_net);
  const int a_dim = env->spec().action_dim;
  const Eigen::VectorXd scale = 0.5 * (env->spec().action_high - env->spec().action_low);
  const Eigen::VectorXd center = 0.5 * (env->spec().action_high + env->spec().action_low);

  auto policy = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd out = policy_net.forward(x);
    Eigen::VectorXd a(a_dim);
    for (int i = 0; i < a_dim; ++i) a(i) = center(i) + scale(i) * std::tanh(out(i));
    return a;
  };
  const auto stats = alam::env::rollout(*env, policy, episodes, seed);

  double mr = 0, mc = 0, mv = 0, mh = 0;
  for (const auto& s : stats) {
    mr += s.episode_return;
    mc += s.total_cost;
    mv += s.violation_fraction;
    mh += s.max_h;
  }
  const double n = static_cast<double>(stats.size());
  mr /= n;
  mc /= n;
  mv /= n;
  mh /= n;
  double sr = 0, sc = 0;
  for (const auto& s : stats) {
    sr += (s.episode_return - mr) * (s.episode_return - mr);
    sc += (s.total_cost - mc) * (s.total_cost - mc);
  }
  sr = stats.size() > 1 ? std::sqrt(sr / (n - 1)) : 0.0;
  sc = stats.size() > 1 ? std::sqrt(sc / (n - 1)) : 0.0;

  std::cout << "episodes: " << episodes << "\n"
            << "return: " << mr << " +- " << sr << "\n"
            << "cost: " << mc << " +- " << sc << "\n"
            << "violation_fraction: " << mv << "\n"
            << "max_h: " << mh << "\n";
  return 0;
}

int cmd_aggregate(const std::vector<std::string>& roots, const std::string& out_csv) {
  const auto dirs = alam::harness::discover_runs(roots);
  std::vector<alam::harness::RunSummary> summaries;
  for (const auto& d : dirs) summaries.push_back(alam::harness::summarize_run(d));
  const auto agg = alam::harness::aggregate_normalized(summaries);
  const std::string table = alam::harness::aggregate_table(agg);
  std::cout << table;
  if (!out_csv.empty()) {
    std::ofstream out(out_csv, std::ios::trunc);
    out << table;
    std::cout << "wrote " << out_csv << "\n";
  }
  return 0;
}

int cmd_heatmap(const std::string& ckpt, const std::string& env_id, const std::string& dims,
                const std::vector<std::string>& fixed, double lo_x, double hi_x, double lo_y,
                double hi_y, int res, const std::string& out_csv,
                const std::vector<double>& hazards) {
  const auto env = alam::env::make_environment(env_id, hazards);
  alam::harness::HeatmapSpec spec;
  {
    std::stringstream ss(dims);
    std::string tok;
    std::vector<int> d;
    while (std::getline(ss, tok, ',')) d.push_back(std::stoi(tok));
    if (d.size() != 2) throw CLI::ValidationError("--dims expects exactly two indices");
    spec.dim_x = d[0];
    spec.dim_y = d[1];
  }
  for (const auto& kv : fixed) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--fixed expects dim=value");
    spec.fixed[std::stoi(kv.substr(0, eq))] = std::stod(kv.substr(eq + 1));
  }
  spec.x_min = lo_x;
  spec.x_max = hi_x;
  spec.y_min = lo_y;
  spec.y_max = hi_y;
  spec.resolution = res;
  alam::harness::export_lambda_heatmap(ckpt, env->spec().state_dim, spec, out_csv);
  std::cout << "wrote " << out_csv << "\n";
  return 0;
}

int cmd_toy_convex(int problems, int states, int iters, std::uint64_t seed,
                   const std::string& out_dir) {
  namespace toy = alam::toy;
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  std::mt19937_64 rng(seed);
  int failures = 0;
  for (int k = 0; k < problems; ++k) {
    toy::GeneratorOptions gopt;
    gopt.n_states = states;
    const auto pb = toy::random_problem(gopt, rng);

    toy::AlamOptions opt;
    opt.max_outer = iters;
    const std::string csv =
        out_dir.empty() ? std::string() : out_dir + "/toy_" + std::to_string(k) + ".csv";
    const auto trace = toy::solve_alam(pb, opt, csv);
    const auto& last = trace.iterates.back();
    const auto kkt = toy::kkt_residual(pb, last.u, last.lam);
    const auto oracle = toy::oracle_solve(pb);
    const double u_gap = (last.u - oracle.u).cwiseAbs().maxCoeff();
    const double lam_gap = (last.lam - oracle.lam).cwiseAbs().maxCoeff();
    const bool dual_stalled = last.dual_step_norm < 1e-6;
    const bool ok = dual_stalled && kkt.max() <= 1e-4 && u_gap <= 1e-4 && lam_gap <= 1e-4;
    failures += ok ? 0 : 1;
    std::printf(
        "[%s] problem %2d: outer=%zu dual_step=%.2e kkt=%.2e |u-u*|=%.2e |lam-lam*|=%.2e\n",
        ok ? "PASS" : "FAIL", k, trace.iterates.size() - 1, last.dual_step_norm, kkt.max(),
        u_gap, lam_gap);
  }
  std::cout << (failures == 0 ? "all problems converged to the oracle solution\n"
                              : std::to_string(failures) + " problem(s) failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmented Lagrangian multiplier-network safe RL workbench"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train one agent on one environment");
  std::string t_config, t_agent, t_env, t_seeds, t_out;
  long t_steps = 0;
  bool t_force = false, t_resume = false;
  std::vector<std::string> t_sets;
  train->add_option("--config", t_config, "experiment config file");
  train->add_option("--agent", t_agent, "sac|sac-lag|sac-lagnet|sac-alam|sac-alam-ga");
  train->add_option("--env", t_env, "double-integrator|point-goal|point-circle");
  train->add_option("--seed", t_seeds, "seed or comma list");
  train->add_option("--steps", t_steps, "total environment steps");
  train->add_option("--out", t_out, "output directory");
  train->add_flag("--force", t_force, "overwrite existing run directories");
  train->add_flag("--resume", t_resume, "resume partial runs, skip complete ones");
  train->add_option("--set", t_sets, "config override key=value (repeatable)");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "roll out a checkpointed policy");
  std::string e_ckpt, e_env;
  int e_episodes = 20;
  std::uint64_t e_seed = 0;
  std::vector<double> e_hazards;
  eval->add_option("--ckpt", e_ckpt)->required();
  eval->add_option("--env", e_env)->required();
  eval->add_option("--episodes", e_episodes);
  eval->add_option("--seed", e_seed);
  eval->add_option("--hazards", e_hazards, "x,y,r triples overriding the point-goal layout");

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "min-max normalized cross-run summary");
  std::vector<std::string> a_runs;
  std::string a_out;
  agg->add_option("runs", a_runs, "run directories or parents")->required();
  agg->add_option("--out", a_out, "also write the table to this CSV");

  // heatmap
  auto* heat = app.add_subcommand("heatmap", "export the multiplier over a state grid");
  std::string h_ckpt, h_env, h_dims = "0,1", h_out = "heatmap.csv";
  std::vector<std::string> h_fixed;
  std::vector<double> h_hazards;
  double h_lox = -2.5, h_hix = 2.5, h_loy = -2.5, h_hiy = 2.5;
  int h_res = 61;
  heat->add_option("--ckpt", h_ckpt)->required();
  heat->add_option("--env", h_env)->required();
  heat->add_option("--dims", h_dims, "two comma-separated free state dims");
  heat->add_option("--fixed", h_fixed, "dim=value for the remaining dims (repeatable)");
  heat->add_option("--x-min", h_lox);
  heat->add_option("--x-max", h_hix);
  heat->add_option("--y-min", h_loy);
  heat->add_option("--y-max", h_hiy);
  heat->add_option("--res", h_res);
  heat->add_option("--out", h_out);
  heat->add_option("--hazards", h_hazards);

  // toy-convex
  auto* toy = app.add_subcommand("toy-convex", "exact tabular solver vs oracle");
  int y_problems = 20, y_states = 10, y_iters = 500;
  std::uint64_t y_seed = 7;
  std::string y_out;
  toy->add_option("--problems", y_problems);
  toy->add_option("--states", y_states);
  toy->add_option("--iters", y_iters);
  toy->add_option("--seed", y_seed);
  toy->add_option("--out", y_out, "directory for per-iteration CSV traces");

  // selftest
  auto* self = app.add_subcommand("selftest", "gradient and oracle checks");
  std::uint64_t s_seed = 7;
  self->add_option("--seed", s_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train)
      return cmd_train(t_config, t_agent, t_env, t_seeds, t_steps, t_out, t_force, t_resume,
                       t_sets);
    if (*eval) return cmd_evaluate(e_ckpt, e_env, e_episodes, e_seed, e_hazards);
    if (*agg) return cmd_aggregate(a_runs, a_out);
    if (*heat)
      return cmd_heatmap(h_ckpt, h_env, h_dims, h_fixed, h_lox, h_hix, h_loy, h_hiy, h_res,
                         h_out, h_hazards);
    if (*toy) return cmd_toy_convex(y_problems, y_states, y_iters, y_seed, y_out);
    if (*self) return alam::selftest::report(alam::selftest::run_all(s_seed)) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
