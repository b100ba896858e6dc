#include "alam/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace alam::nn {

Adam::Adam(std::vector<ParamBlock*> blocks, double lr, double beta1, double beta2, double eps)
    : blocks_(std::move(blocks)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(blocks_.size());
  v_.reserve(blocks_.size());
  for (const ParamBlock* b : blocks_) {
    m_.push_back(Mat::Zero(b->value.rows(), b->value.cols()));
    v_.push_back(Mat::Zero(b->value.rows(), b->value.cols()));
  }
}

void Adam::apply(std::size_t i, const Mat* g) {
  ParamBlock& p = *blocks_[i];
  if (g) {
    if (g->rows() != p.value.rows() || g->cols() != p.value.cols())
      throw std::invalid_argument("adam: gradient shape mismatch for " + p.name);
    if (!g->allFinite())
      throw std::runtime_error("adam: non-finite gradient in block '" + p.name + "'");
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * *g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g->cwiseProduct(*g);
  } else {
    m_[i] *= beta1_;
    v_[i] *= beta2_;
  }
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  p.value.array() -= lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
}

void Adam::step(const Tape& tape) {
  ++t_;
  for (std::size_t i = 0; i < blocks_.size(); ++i) apply(i, tape.grad_ref(*blocks_[i]));
}

void Adam::step(const std::vector<Mat>& grads) {
  if (grads.size() != blocks_.size())
    throw std::invalid_argument("adam: gradient list size mismatch");
  ++t_;
  for (std::size_t i = 0; i < blocks_.size(); ++i) apply(i, &grads[i]);
}

}  // namespace alam::nn
