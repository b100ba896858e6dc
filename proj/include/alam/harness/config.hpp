#pragma once

#include <map>
#include <string>
#include <vector>

#include "alam/rl/config.hpp"

namespace alam::harness {

/// One experiment: a single agent on a single environment over a seed list.
/// Loaded from a flat TOML-like key = value file; CLI flags override fields.
struct ExperimentConfig {
  std::string agent;
  std::string env;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  rl::AgentConfig agent_config;
  std::vector<double> hazards;  // optional point-goal layout override
  bool force = false;
  bool resume = false;

  void validate() const;
  /// TOML-like dump used for the per-run config snapshot.
  std::string snapshot() const;
};

/// Parses `key = value` lines: quoted strings, numbers, booleans and
/// numeric lists in brackets. '#' starts a comment.
ExperimentConfig parse_experiment_file(const std::string& path);

/// Applies one key (file syntax) onto a config; unknown keys throw.
void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& raw_value);

}  // namespace alam::harness
