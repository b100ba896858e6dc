#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace alam::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

/// A named block of trainable parameters. Identity (the address) is what the
/// tape and the optimizer key on, so blocks must stay put once created.
struct ParamBlock {
  Mat value;
  std::string name;
};

/// Handle to a node on a Tape. Only valid for the tape that produced it and
/// until the next reset().
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over matrix-valued nodes.
///
/// A loss is built by recording ops, then backward() seeds the scalar root
/// and sweeps the tape in reverse. Gradients w.r.t. bound ParamBlocks are
/// read back with grad_of(). reset() keeps node storage so per-step tapes
/// do not churn the allocator.
class Tape {
 public:
  // leaves
  Var constant(const Mat& v);
  Var constant(Mat&& v);
  Var constant_scalar(double v);
  Var param(const ParamBlock& block);

  // elementwise binary (shapes must match)
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var cmax(Var a, Var b);
  Var cmin(Var a, Var b);

  // linear algebra
  Var matmul(Var a, Var b);
  Var vcat(Var top, Var bottom);
  /// X + b * ones(1, cols): broadcast a column vector over all columns.
  Var add_colvec(Var x, Var b);
  /// Fused W*X + b (optionally through ReLU); one node per network layer.
  Var linear(Var w, Var x, Var b, bool relu_after);
  /// diag(c) * X with a constant per-row scale.
  Var scale_rows(Var x, const Vec& c);

  // elementwise unary
  Var relu(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var softplus(Var a);
  Var square(Var a);
  Var neg(Var a);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var clamp(Var a, double lo, double hi);

  /// Value passes through, gradient does not (the stop-gradient marker).
  Var detach(Var a);

  // shape ops
  Var rows(Var a, int first, int count);
  /// [X X ... X], k copies side by side.
  Var tile_cols(Var a, int k);
  /// (r x k*b) -> (r x b): mean over the k column blocks.
  Var block_mean_cols(Var a, int k);
  /// (r x b) -> (1 x b)
  Var colwise_sum(Var a);

  // reductions / scalar plumbing
  Var sum_all(Var a);
  Var mean_all(Var a);
  /// x * s with s a 1x1 node, broadcast over x.
  Var mul_scalar_node(Var x, Var s);

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape. loss must be 1x1.
  /// Returns the loss value.
  double backward(Var loss);

  const Mat& value(Var v) const;
  /// Gradient of the last backward() w.r.t. a node (zero matrix if the node
  /// was not reached).
  Mat grad(Var v) const;
  /// Gradient w.r.t. a bound parameter block (zeros if never bound).
  Mat grad_of(const ParamBlock& block) const;
  /// Borrowed gradient, nullptr when unbound or unreached.
  const Mat* grad_ref(const ParamBlock& block) const;
  bool is_bound(const ParamBlock& block) const;

  int size() const { return count_; }
  /// Drop all nodes but keep their buffers for reuse.
  void reset();

 private:
  enum class Op {
    kConstant, kParam,
    kAdd, kSub, kMul, kCMax, kCMin,
    kMatMul, kVCat, kAddColVec, kLinear, kScaleRows,
    kRelu, kTanh, kExp, kLog, kSoftplus, kSquare, kNeg, kScale, kAddScalar,
    kClamp, kDetach,
    kRows, kTileCols, kBlockMeanCols, kColwiseSum,
    kSumAll, kMeanAll, kMulScalarNode,
  };

  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    double s0 = 0.0, s1 = 0.0;
    Vec payload;
    Mat value;
    Mat grad;
    bool needs_grad = false;
    bool grad_live = false;  // grad initialized during current backward
  };

  Node& fresh(Op op, int a, int b, double s0 = 0.0, double s1 = 0.0);
  Var last() const;
  Node& at(Var v);
  const Node& at(Var v) const;
  Mat& grad_buf(int id);
  /// Assign-on-first-touch accumulation (skips the zero-fill pass).
  template <class E>
  void acc(int id, const E& expr);
  void check_same_shape(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
  int count_ = 0;
  std::vector<std::pair<const ParamBlock*, int>> bindings_;
};

}  // namespace alam::nn
