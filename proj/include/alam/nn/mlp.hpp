#pragma once

#include <random>
#include <string>
#include <vector>

#include "alam/nn/tape.hpp"

namespace alam::nn {

/// Output nonlinearity tag. Softplus marks networks whose outputs must stay
/// nonnegative (cost critics, the multiplier network).
enum class OutputMap { kIdentity, kSoftplus };

std::string output_map_name(OutputMap m);
OutputMap output_map_from_name(const std::string& s);

struct MlpConfig {
  int input_dim = 0;
  int output_dim = 0;
  std::vector<int> hidden;  // ReLU layers
  OutputMap output_map = OutputMap::kIdentity;
};

/// Fully-connected ReLU network with a flat-parameter view.
///
/// Weights are fan-in-scaled uniform at init, the same default for biases.
/// forward() has a plain fast path (no tape) and a recording path; the
/// recording path can insert parameters either as trainables or as constants
/// so that losses over frozen networks skip their weight-gradient GEMMs.
class Mlp {
 public:
  Mlp(MlpConfig cfg, std::mt19937_64& rng);

  /// Plain evaluation, one column per sample.
  Mat forward(const Mat& input) const;
  Vec forward(const Vec& input) const;

  /// Recording evaluation. train=false inserts weights as constants.
  Var forward(Tape& tape, Var input, bool train) const;

  const MlpConfig& config() const { return cfg_; }
  std::vector<ParamBlock>& blocks() { return blocks_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  int param_count() const;
  Vec to_flat() const;
  void from_flat(const Vec& flat);

  /// Zeroes the final linear layer and sets its bias so every output equals
  /// `value` (after the output map).
  void set_constant_output(double value);

 private:
  MlpConfig cfg_;
  std::vector<ParamBlock> blocks_;  // W0, b0, W1, b1, ...
};

/// target <- tau * online + (1 - tau) * target, elementwise over all blocks.
void soft_update(Mlp& target, const Mlp& online, double tau);
void soft_update(ParamBlock& target, const ParamBlock& online, double tau);

}  // namespace alam::nn
