#pragma once

#include <vector>

#include "alam/nn/tape.hpp"

namespace alam::nn {

/// Adam over a fixed list of parameter blocks.
///
/// Stand-in for the adaptive-moment optimizer the training recipe calls for.
/// A NaN or inf gradient aborts the run with the offending block named.
class Adam {
 public:
  explicit Adam(std::vector<ParamBlock*> blocks, double lr,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  /// Applies one update from the gradients recorded on `tape`.
  /// Blocks the tape never bound receive a zero gradient (moments decay).
  void step(const Tape& tape);

  /// Update from explicit gradients (same order as the block list).
  void step(const std::vector<Mat>& grads);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  long step_count() const { return t_; }

 private:
  void apply(std::size_t i, const Mat* grad);

  std::vector<ParamBlock*> blocks_;
  std::vector<Mat> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace alam::nn
