#include "alam/nn/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace alam::nn {

// Node slots are pooled: reset() rewinds the count but keeps every Mat's
// heap buffer, so steady-state training steps run without allocator churn
// (loss graphs have identical shapes step over step).

Tape::Node& Tape::fresh(Op op, int a, int b, double s0, double s1) {
  if (count_ == static_cast<int>(nodes_.size())) nodes_.emplace_back();
  Node& n = nodes_[count_++];
  n.op = op;
  n.a = a;
  n.b = b;
  n.c = -1;
  n.s0 = s0;
  n.s1 = s1;
  n.grad_live = false;
  bool pa = a >= 0 && nodes_[a].needs_grad;
  bool pb = b >= 0 && nodes_[b].needs_grad;
  n.needs_grad = op == Op::kParam || ((pa || pb) && op != Op::kDetach);
  return n;
}

Var Tape::last() const { return Var{count_ - 1}; }

Tape::Node& Tape::at(Var v) {
  if (!v.valid() || v.id >= count_) throw std::invalid_argument("tape: bad Var");
  return nodes_[v.id];
}

const Tape::Node& Tape::at(Var v) const {
  if (!v.valid() || v.id >= count_) throw std::invalid_argument("tape: bad Var");
  return nodes_[v.id];
}

void Tape::check_same_shape(Var a, Var b, const char* op) const {
  const Mat& va = at(a).value;
  const Mat& vb = at(b).value;
  if (va.rows() != vb.rows() || va.cols() != vb.cols())
    throw std::invalid_argument(std::string("tape: shape mismatch in ") + op);
}

Var Tape::constant(const Mat& v) {
  fresh(Op::kConstant, -1, -1).value = v;
  return last();
}

Var Tape::constant(Mat&& v) {
  fresh(Op::kConstant, -1, -1).value = std::move(v);
  return last();
}

Var Tape::constant_scalar(double v) {
  Node& n = fresh(Op::kConstant, -1, -1);
  n.value.resize(1, 1);
  n.value(0, 0) = v;
  return last();
}

Var Tape::param(const ParamBlock& block) {
  for (const auto& [ptr, id] : bindings_)
    if (ptr == &block) return Var{id};
  fresh(Op::kParam, -1, -1).value = block.value;
  bindings_.emplace_back(&block, count_ - 1);
  return last();
}

// NOTE: fresh() may grow the node pool, so operand references must be taken
// only after it returns.

Var Tape::add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Node& n = fresh(Op::kAdd, a.id, b.id);
  n.value = nodes_[a.id].value + nodes_[b.id].value;
  return last();
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Node& n = fresh(Op::kSub, a.id, b.id);
  n.value = nodes_[a.id].value - nodes_[b.id].value;
  return last();
}

Var Tape::mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  Node& n = fresh(Op::kMul, a.id, b.id);
  n.value = nodes_[a.id].value.cwiseProduct(nodes_[b.id].value);
  return last();
}

Var Tape::cmax(Var a, Var b) {
  check_same_shape(a, b, "cmax");
  Node& n = fresh(Op::kCMax, a.id, b.id);
  n.value = nodes_[a.id].value.cwiseMax(nodes_[b.id].value);
  return last();
}

Var Tape::cmin(Var a, Var b) {
  check_same_shape(a, b, "cmin");
  Node& n = fresh(Op::kCMin, a.id, b.id);
  n.value = nodes_[a.id].value.cwiseMin(nodes_[b.id].value);
  return last();
}

Var Tape::matmul(Var a, Var b) {
  if (at(a).value.cols() != at(b).value.rows())
    throw std::invalid_argument("tape: matmul inner dim mismatch");
  Node& n = fresh(Op::kMatMul, a.id, b.id);
  const Mat& va = nodes_[a.id].value;
  const Mat& vb = nodes_[b.id].value;
  n.value.resize(va.rows(), vb.cols());
  n.value.noalias() = va * vb;
  return last();
}

Var Tape::vcat(Var top, Var bottom) {
  if (at(top).value.cols() != at(bottom).value.cols())
    throw std::invalid_argument("tape: vcat column mismatch");
  Node& n = fresh(Op::kVCat, top.id, bottom.id, static_cast<double>(at(top).value.rows()));
  const Mat& vt = nodes_[top.id].value;
  const Mat& vb = nodes_[bottom.id].value;
  n.value.resize(vt.rows() + vb.rows(), vt.cols());
  n.value.topRows(vt.rows()) = vt;
  n.value.bottomRows(vb.rows()) = vb;
  return last();
}

Var Tape::add_colvec(Var x, Var b) {
  if (at(b).value.cols() != 1 || at(b).value.rows() != at(x).value.rows())
    throw std::invalid_argument("tape: add_colvec expects matching column vector");
  Node& n = fresh(Op::kAddColVec, x.id, b.id);
  n.value = nodes_[x.id].value.colwise() + nodes_[b.id].value.col(0);
  return last();
}

Var Tape::linear(Var w, Var x, Var b, bool relu_after) {
  const Mat& wv = at(w).value;
  if (wv.cols() != at(x).value.rows())
    throw std::invalid_argument("tape: linear inner dim mismatch");
  if (at(b).value.cols() != 1 || at(b).value.rows() != wv.rows())
    throw std::invalid_argument("tape: linear bias shape mismatch");
  Node& n = fresh(Op::kLinear, w.id, x.id, relu_after ? 1.0 : 0.0);
  n.c = b.id;
  if (nodes_[b.id].needs_grad) n.needs_grad = true;
  const Mat& wm = nodes_[w.id].value;
  const Mat& xm = nodes_[x.id].value;
  n.value.resize(wm.rows(), xm.cols());
  n.value.noalias() = wm * xm;
  if (relu_after)
    n.value = (n.value.colwise() + nodes_[b.id].value.col(0)).cwiseMax(0.0);
  else
    n.value.colwise() += nodes_[b.id].value.col(0);
  return last();
}

Var Tape::scale_rows(Var x, const Vec& c) {
  if (c.size() != at(x).value.rows())
    throw std::invalid_argument("tape: scale_rows size mismatch");
  Node& n = fresh(Op::kScaleRows, x.id, -1);
  n.payload = c;
  n.value = c.asDiagonal() * nodes_[x.id].value;
  return last();
}

Var Tape::relu(Var a) {
  Node& n = fresh(Op::kRelu, a.id, -1);
  n.value = nodes_[a.id].value.cwiseMax(0.0);
  return last();
}

Var Tape::tanh(Var a) {
  Node& n = fresh(Op::kTanh, a.id, -1);
  n.value = nodes_[a.id].value.array().tanh();
  return last();
}

Var Tape::exp(Var a) {
  Node& n = fresh(Op::kExp, a.id, -1);
  n.value = nodes_[a.id].value.array().exp();
  return last();
}

Var Tape::log(Var a) {
  Node& n = fresh(Op::kLog, a.id, -1);
  n.value = nodes_[a.id].value.array().log();
  return last();
}

Var Tape::softplus(Var a) {
  // log(1 + e^x) as max(x,0) + log1p(e^{-|x|}) to avoid overflow
  Node& n = fresh(Op::kSoftplus, a.id, -1);
  n.value = nodes_[a.id].value.array().max(0.0) +
            (-nodes_[a.id].value.array().abs()).exp().log1p();
  return last();
}

Var Tape::square(Var a) {
  Node& n = fresh(Op::kSquare, a.id, -1);
  n.value = nodes_[a.id].value.array().square();
  return last();
}

Var Tape::neg(Var a) {
  Node& n = fresh(Op::kNeg, a.id, -1);
  n.value = -nodes_[a.id].value;
  return last();
}

Var Tape::scale(Var a, double s) {
  Node& n = fresh(Op::kScale, a.id, -1, s);
  n.value = s * nodes_[a.id].value;
  return last();
}

Var Tape::add_scalar(Var a, double s) {
  Node& n = fresh(Op::kAddScalar, a.id, -1, s);
  n.value = nodes_[a.id].value.array() + s;
  return last();
}

Var Tape::clamp(Var a, double lo, double hi) {
  Node& n = fresh(Op::kClamp, a.id, -1, lo, hi);
  n.value = nodes_[a.id].value.cwiseMax(lo).cwiseMin(hi);
  return last();
}

Var Tape::detach(Var a) {
  Node& n = fresh(Op::kDetach, a.id, -1);
  n.value = nodes_[a.id].value;
  return last();
}

Var Tape::rows(Var a, int first, int count) {
  if (first < 0 || count < 0 || first + count > at(a).value.rows())
    throw std::invalid_argument("tape: rows() out of range");
  Node& n = fresh(Op::kRows, a.id, -1, first, count);
  n.value = nodes_[a.id].value.middleRows(first, count);
  return last();
}

Var Tape::tile_cols(Var a, int k) {
  if (k < 1) throw std::invalid_argument("tape: tile_cols needs k >= 1");
  Node& n = fresh(Op::kTileCols, a.id, -1, k);
  const Mat& va = nodes_[a.id].value;
  n.value.resize(va.rows(), va.cols() * k);
  for (int i = 0; i < k; ++i) n.value.middleCols(i * va.cols(), va.cols()) = va;
  return last();
}

Var Tape::block_mean_cols(Var a, int k) {
  if (k < 1 || at(a).value.cols() % k != 0)
    throw std::invalid_argument("tape: block_mean_cols needs cols divisible by k");
  Node& n = fresh(Op::kBlockMeanCols, a.id, -1, k);
  const Mat& va = nodes_[a.id].value;
  const Eigen::Index b = va.cols() / k;
  n.value = va.leftCols(b);
  for (int i = 1; i < k; ++i) n.value += va.middleCols(i * b, b);
  n.value /= static_cast<double>(k);
  return last();
}

Var Tape::colwise_sum(Var a) {
  Node& n = fresh(Op::kColwiseSum, a.id, -1);
  n.value = nodes_[a.id].value.colwise().sum();
  return last();
}

Var Tape::sum_all(Var a) {
  Node& n = fresh(Op::kSumAll, a.id, -1);
  n.value.resize(1, 1);
  n.value(0, 0) = nodes_[a.id].value.sum();
  return last();
}

Var Tape::mean_all(Var a) {
  Node& n = fresh(Op::kMeanAll, a.id, -1);
  n.value.resize(1, 1);
  n.value(0, 0) = nodes_[a.id].value.mean();
  return last();
}

Var Tape::mul_scalar_node(Var x, Var s) {
  if (at(s).value.rows() != 1 || at(s).value.cols() != 1)
    throw std::invalid_argument("tape: mul_scalar_node expects 1x1 scalar node");
  Node& n = fresh(Op::kMulScalarNode, x.id, s.id);
  n.value = nodes_[x.id].value * nodes_[s.id].value(0, 0);
  return last();
}

Mat& Tape::grad_buf(int id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    n.grad.resize(n.value.rows(), n.value.cols());
    n.grad.setZero();
    n.grad_live = true;
  }
  return n.grad;
}

template <class E>
void Tape::acc(int id, const E& expr) {
  if (id < 0) return;
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (!n.grad_live) {
    n.grad.resize(n.value.rows(), n.value.cols());
    n.grad.noalias() = expr;
    n.grad_live = true;
  } else {
    n.grad.noalias() += expr;
  }
}

double Tape::backward(Var loss) {
  Node& root = at(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1)
    throw std::invalid_argument("tape: backward root must be a 1x1 scalar");
  for (int i = 0; i < count_; ++i) nodes_[i].grad_live = false;
  if (!root.needs_grad) return root.value(0, 0);
  grad_buf(loss.id).setOnes();

  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.grad_live || !n.needs_grad) continue;
    const Mat& g = n.grad;
    const int a = n.a, b = n.b;
    auto aval = [&]() -> const Mat& { return nodes_[a].value; };
    auto bval = [&]() -> const Mat& { return nodes_[b].value; };
    auto a_needs = [&]() { return a >= 0 && nodes_[a].needs_grad; };
    auto b_needs = [&]() { return b >= 0 && nodes_[b].needs_grad; };

    switch (n.op) {
      case Op::kConstant:
      case Op::kParam:
      case Op::kDetach:
        break;
      case Op::kAdd:
        acc(a, g);
        acc(b, g);
        break;
      case Op::kSub:
        acc(a, g);
        acc(b, -g);
        break;
      case Op::kMul:
        if (a_needs()) acc(a, g.cwiseProduct(bval()));
        if (b_needs()) acc(b, g.cwiseProduct(aval()));
        break;
      case Op::kCMax:
        // ties route to the first argument
        if (a_needs())
          acc(a, (g.array() * (aval().array() >= bval().array()).cast<double>()).matrix());
        if (b_needs())
          acc(b, (g.array() * (aval().array() < bval().array()).cast<double>()).matrix());
        break;
      case Op::kCMin:
        if (a_needs())
          acc(a, (g.array() * (aval().array() <= bval().array()).cast<double>()).matrix());
        if (b_needs())
          acc(b, (g.array() * (aval().array() > bval().array()).cast<double>()).matrix());
        break;
      case Op::kMatMul:
        if (a_needs()) acc(a, g * bval().transpose());
        if (b_needs()) acc(b, aval().transpose() * g);
        break;
      case Op::kVCat: {
        const int top_rows = static_cast<int>(n.s0);
        if (a_needs()) acc(a, g.topRows(top_rows));
        if (b_needs()) acc(b, g.bottomRows(g.rows() - top_rows));
        break;
      }
      case Op::kAddColVec:
        acc(a, g);
        if (b_needs()) acc(b, g.rowwise().sum());
        break;
      case Op::kLinear: {
        // parents: a = W, b = X, c = bias. With ReLU fused, mask the incoming
        // gradient in place (this node's grad is not read again afterwards).
        if (n.s0 != 0.0) n.grad.array() *= (n.value.array() > 0.0).cast<double>();
        const Mat& gm = n.grad;
        if (a_needs()) acc(a, gm * bval().transpose());
        if (b_needs()) acc(b, aval().transpose() * gm);
        if (n.c >= 0 && nodes_[n.c].needs_grad) acc(n.c, gm.rowwise().sum());
        break;
      }
      case Op::kScaleRows:
        if (a_needs()) acc(a, n.payload.asDiagonal() * g);
        break;
      case Op::kRelu:
        if (a_needs())
          acc(a, (g.array() * (aval().array() > 0.0).cast<double>()).matrix());
        break;
      case Op::kTanh:
        if (a_needs()) acc(a, (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case Op::kExp:
        if (a_needs()) acc(a, g.cwiseProduct(n.value));
        break;
      case Op::kLog:
        if (a_needs()) acc(a, (g.array() / aval().array()).matrix());
        break;
      case Op::kSoftplus:
        // d/dx log(1+e^x) = sigmoid(x)
        if (a_needs()) acc(a, (g.array() / (1.0 + (-aval().array()).exp())).matrix());
        break;
      case Op::kSquare:
        if (a_needs()) acc(a, (2.0 * g.array() * aval().array()).matrix());
        break;
      case Op::kNeg:
        acc(a, -g);
        break;
      case Op::kScale:
        acc(a, n.s0 * g);
        break;
      case Op::kAddScalar:
        acc(a, g);
        break;
      case Op::kClamp:
        if (a_needs())
          acc(a, (g.array() *
                  ((aval().array() >= n.s0) && (aval().array() <= n.s1)).cast<double>())
                     .matrix());
        break;
      case Op::kRows: {
        // writes a slice of the parent, so the rest must be zero-filled
        if (a_needs())
          grad_buf(a).middleRows(static_cast<int>(n.s0), static_cast<int>(n.s1)) += g;
        break;
      }
      case Op::kTileCols: {
        if (a_needs()) {
          const int k = static_cast<int>(n.s0);
          const Eigen::Index bcols = nodes_[a].value.cols();
          acc(a, g.leftCols(bcols));
          Mat& ga = nodes_[a].grad;
          for (int t = 1; t < k; ++t) ga += g.middleCols(t * bcols, bcols);
        }
        break;
      }
      case Op::kBlockMeanCols: {
        if (a_needs()) {
          const int k = static_cast<int>(n.s0);
          const Eigen::Index bcols = n.value.cols();
          const double inv_k = 1.0 / static_cast<double>(k);
          acc(a, (inv_k * g).replicate(1, k));
        }
        break;
      }
      case Op::kColwiseSum:
        if (a_needs()) acc(a, g.replicate(nodes_[a].value.rows(), 1));
        break;
      case Op::kSumAll:
        if (a_needs())
          acc(a, Mat::Constant(nodes_[a].value.rows(), nodes_[a].value.cols(), g(0, 0)));
        break;
      case Op::kMeanAll:
        if (a_needs())
          acc(a, Mat::Constant(nodes_[a].value.rows(), nodes_[a].value.cols(),
                               g(0, 0) / static_cast<double>(nodes_[a].value.size())));
        break;
      case Op::kMulScalarNode:
        if (a_needs()) acc(a, g * bval()(0, 0));
        if (b_needs()) grad_buf(b)(0, 0) += g.cwiseProduct(aval()).sum();
        break;
    }
  }
  return root.value(0, 0);
}

const Mat& Tape::value(Var v) const { return at(v).value; }

Mat Tape::grad(Var v) const {
  const Node& n = at(v);
  if (!n.grad_live) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

const Mat* Tape::grad_ref(const ParamBlock& block) const {
  for (const auto& [ptr, id] : bindings_)
    if (ptr == &block) {
      const Node& n = nodes_[id];
      return n.grad_live ? &n.grad : nullptr;
    }
  return nullptr;
}

Mat Tape::grad_of(const ParamBlock& block) const {
  if (const Mat* g = grad_ref(block)) return *g;
  return Mat::Zero(block.value.rows(), block.value.cols());
}

bool Tape::is_bound(const ParamBlock& block) const {
  for (const auto& [ptr, id] : bindings_)
    if (ptr == &block) return true;
  return false;
}

void Tape::reset() {
  count_ = 0;
  bindings_.clear();
}

}  // namespace alam::nn
