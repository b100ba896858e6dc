#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "alam/nn/mlp.hpp"

namespace alam::nn {

/// Checkpoint file layout:
///   u64 little-endian header length, JSON header bytes, then every listed
///   network's parameters as one flat little-endian float64 array.
/// The header records each network's architecture and offset plus free-form
/// scalar metadata under "extra".
struct CheckpointEntry {
  std::string name;
  const Mlp* net = nullptr;
};

void save_checkpoint(const std::string& path, const std::vector<CheckpointEntry>& nets,
                     const nlohmann::json& extra = nlohmann::json::object());

struct LoadedCheckpoint {
  nlohmann::json header;
  std::map<std::string, Vec> flat;  // per-network flat parameters

  /// Architecture for a stored net (throws if absent).
  MlpConfig config_of(const std::string& name) const;
  /// Copies stored parameters into an existing net (architecture must match).
  void restore(const std::string& name, Mlp& net) const;
  bool has(const std::string& name) const { return flat.count(name) > 0; }
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace alam::nn
