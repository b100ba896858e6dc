#pragma once

#include <string>
#include <vector>

#include "alam/harness/config.hpp"
#include "alam/rl/trainer.hpp"

namespace alam::harness {

struct RunOutcome {
  std::string run_dir;
  std::uint64_t seed = 0;
  bool skipped = false;  // already complete, left untouched
  rl::EvalRecord final_eval;
};

/// Directory name for one (agent, env, seed) run under the experiment root.
std::string run_dir_name(const ExperimentConfig& cfg, std::uint64_t seed);

/// Runs every seed of the experiment, up to ALAM_THREADS runs in parallel
/// (each run itself single-threaded). Each run directory receives
/// config.snapshot, metrics.csv, events.jsonl, checkpoint.ckpt and a `done`
/// marker; an index manifest.json lands in the experiment root.
///
/// Existing run directories: complete ones are skipped under --resume and
/// refused otherwise unless --force; partial ones resume from their last
/// checkpoint under --resume, are refused without --force otherwise.
std::vector<RunOutcome> run_experiment(const ExperimentConfig& cfg, bool quiet = false);

}  // namespace alam::harness
