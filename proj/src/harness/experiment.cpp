#include "alam/harness/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace alam::harness {

namespace fs = std::filesystem;
using nlohmann::json;

std::string run_dir_name(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.out_dir + "/" + cfg.agent + "_" + cfg.env + "_s" + std::to_string(seed);
}

namespace {

int max_parallel_runs(size_t n_runs) {
  if (const char* env = std::getenv("ALAM_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<size_t>(n_runs, hw ? hw : 1));
}

enum class RunState { kFresh, kPartial, kDone };

RunState classify(const std::string& dir) {
  if (!fs::exists(dir)) return RunState::kFresh;
  if (fs::exists(dir + "/done")) return RunState::kDone;
  if (fs::exists(dir + "/metrics.csv") || fs::exists(dir + "/checkpoint.ckpt"))
    return RunState::kPartial;
  return RunState::kFresh;
}

/// Drops metric rows past the checkpoint step so a resumed run appends
/// monotonically.
void truncate_metrics(const std::string& dir, long keep_up_to_step) {
  const std::string path = dir + "/metrics.csv";
  if (!fs::exists(path)) return;
  auto rows = read_metrics_csv(path);
  std::ofstream out(path, std::ios::trunc);
  out << MetricRow::csv_header() << '\n';
  for (const auto& r : rows)
    if (r.env_step <= keep_up_to_step) out << r.csv_line() << '\n';
}

}  // namespace

std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg, bool quiet) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  // refuse duplicate output before any work
  for (std::uint64_t seed : cfg.seeds) {
    const RunState st = classify(run_dir_name(cfg, seed));
    if (st != RunState::kFresh && !cfg.force && !cfg.resume)
      throw std::invalid_argument("run_experiment: output exists: " + run_dir_name(cfg, seed) +
                                  " (use --force to overwrite or --resume to continue)");
  }

  const auto environment = env::make_environment(cfg.env, cfg.hazards);
  const rl::AgentKind kind = rl::agent_from_name(cfg.agent);

  std::vector<RunOutcome> outcomes(cfg.seeds.size());
  std::atomic<size_t> next{0};
  std::mutex io_mutex;

  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= cfg.seeds.size()) return;
      const std::uint64_t seed = cfg.seeds[i];
      const std::string dir = run_dir_name(cfg, seed);
      RunOutcome& out = outcomes[i];
      out.run_dir = dir;
      out.seed = seed;

      RunState st = classify(dir);
      if (st == RunState::kDone && cfg.resume && !cfg.force) {
        out.skipped = true;
        std::lock_guard<std::mutex> lk(io_mutex);
        if (!quiet) std::cout << "[skip] " << dir << " (complete)\n";
        continue;
      }
      const bool resume_partial = st == RunState::kPartial && cfg.resume && !cfg.force;
      if (!resume_partial && st != RunState::kFresh) {
        fs::remove_all(dir);
        st = RunState::kFresh;
      }
      fs::create_directories(dir);
      {
        std::ofstream snap(dir + "/config.snapshot", std::ios::trunc);
        snap << cfg.snapshot() << "seed = " << seed << "\n";
      }

      rl::Trainer trainer(*environment, cfg.agent_config, kind, seed);
      if (resume_partial && fs::exists(dir + "/checkpoint.ckpt")) {
        trainer.load_checkpoint(dir + "/checkpoint.ckpt");
        truncate_metrics(dir, trainer.env_steps_done());
      }
      {
        std::lock_guard<std::mutex> lk(io_mutex);
        if (!quiet)
          std::cout << "[run ] " << dir << " from step " << trainer.env_steps_done() << "/"
                    << cfg.agent_config.total_steps << "\n";
      }
      RunLogger logger(dir, /*append=*/resume_partial);
      out.final_eval = trainer.run(&logger);
      std::ofstream(dir + "/done") << "ok\n";
      {
        std::lock_guard<std::mutex> lk(io_mutex);
        if (!quiet)
          std::cout << "[done] " << dir << " return " << out.final_eval.mean_return << " cost "
                    << out.final_eval.mean_cost << "\n";
      }
    }
  };

  const int n_threads = std::min<int>(max_parallel_runs(cfg.seeds.size()),
                                      static_cast<int>(cfg.seeds.size()));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  json manifest;
  manifest["agent"] = cfg.agent;
  manifest["env"] = cfg.env;
  manifest["runs"] = json::array();
  for (const auto& o : outcomes)
    manifest["runs"].push_back({{"dir", o.run_dir},
                                {"seed", o.seed},
                                {"skipped", o.skipped},
                                {"final_return", o.final_eval.mean_return},
                                {"final_cost", o.final_eval.mean_cost}});
  std::ofstream(cfg.out_dir + "/manifest.json") << manifest.dump(2) << "\n";
  return outcomes;
}

}  // namespace alam::harness
