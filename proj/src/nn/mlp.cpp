#include "alam/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace alam::nn {

std::string output_map_name(OutputMap m) {
  return m == OutputMap::kSoftplus ? "softplus" : "identity";
}

OutputMap output_map_from_name(const std::string& s) {
  if (s == "softplus") return OutputMap::kSoftplus;
  if (s == "identity") return OutputMap::kIdentity;
  throw std::invalid_argument("unknown output map: " + s);
}

Mlp::Mlp(MlpConfig cfg, std::mt19937_64& rng) : cfg_(std::move(cfg)) {
  if (cfg_.input_dim < 1 || cfg_.output_dim < 1)
    throw std::invalid_argument("mlp: dimensions must be positive");
  std::vector<int> dims;
  dims.push_back(cfg_.input_dim);
  for (int h : cfg_.hidden) dims.push_back(h);
  dims.push_back(cfg_.output_dim);

  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    ParamBlock w, b;
    w.name = "W" + std::to_string(l);
    b.name = "b" + std::to_string(l);
    w.value.resize(out, in);
    for (Eigen::Index j = 0; j < w.value.cols(); ++j)
      for (Eigen::Index i = 0; i < w.value.rows(); ++i) w.value(i, j) = u(rng);
    b.value.resize(out, 1);
    for (Eigen::Index i = 0; i < b.value.rows(); ++i) b.value(i, 0) = u(rng);
    blocks_.push_back(std::move(w));
    blocks_.push_back(std::move(b));
  }
}

Mat Mlp::forward(const Mat& input) const {
  if (input.rows() != cfg_.input_dim)
    throw std::invalid_argument("mlp: input dim mismatch");
  // ping-pong scratch keeps steady-state evaluation allocation-free
  static thread_local Mat scratch[2];
  const size_t layers = blocks_.size() / 2;
  const Mat* src = &input;
  for (size_t l = 0; l < layers; ++l) {
    Mat& dst = scratch[l % 2];
    const Mat& w = blocks_[2 * l].value;
    dst.resize(w.rows(), src->cols());
    dst.noalias() = w * *src;
    dst.colwise() += blocks_[2 * l + 1].value.col(0);
    if (l + 1 < layers) dst = dst.cwiseMax(0.0);
    src = &dst;
  }
  Mat out = *src;
  if (cfg_.output_map == OutputMap::kSoftplus)
    out = out.array().max(0.0) + (-out.array().abs()).exp().log1p();
  return out;
}

Vec Mlp::forward(const Vec& input) const { return forward(Mat(input)).col(0); }

Var Mlp::forward(Tape& tape, Var input, bool train) const {
  if (tape.value(input).rows() != cfg_.input_dim)
    throw std::invalid_argument("mlp: input dim mismatch");
  Var h = input;
  const size_t layers = blocks_.size() / 2;
  for (size_t l = 0; l < layers; ++l) {
    Var w = train ? tape.param(blocks_[2 * l]) : tape.constant(blocks_[2 * l].value);
    Var b = train ? tape.param(blocks_[2 * l + 1]) : tape.constant(blocks_[2 * l + 1].value);
    h = tape.linear(w, h, b, /*relu_after=*/l + 1 < layers);
  }
  if (cfg_.output_map == OutputMap::kSoftplus) h = tape.softplus(h);
  return h;
}

int Mlp::param_count() const {
  int n = 0;
  for (const auto& b : blocks_) n += static_cast<int>(b.value.size());
  return n;
}

Vec Mlp::to_flat() const {
  Vec flat(param_count());
  Eigen::Index at = 0;
  for (const auto& b : blocks_) {
    flat.segment(at, b.value.size()) = Eigen::Map<const Vec>(b.value.data(), b.value.size());
    at += b.value.size();
  }
  return flat;
}

void Mlp::from_flat(const Vec& flat) {
  if (flat.size() != param_count())
    throw std::invalid_argument("mlp: flat parameter size mismatch");
  Eigen::Index at = 0;
  for (auto& b : blocks_) {
    Eigen::Map<Vec>(b.value.data(), b.value.size()) = flat.segment(at, b.value.size());
    at += b.value.size();
  }
}

void Mlp::set_constant_output(double value) {
  ParamBlock& w = blocks_[blocks_.size() - 2];
  ParamBlock& b = blocks_[blocks_.size() - 1];
  w.value.setZero();
  double z = value;
  if (cfg_.output_map == OutputMap::kSoftplus) {
    if (value <= 0.0) throw std::invalid_argument("mlp: softplus output target must be > 0");
    z = std::log(std::expm1(value));  // softplus inverse
  }
  b.value.setConstant(z);
}

void soft_update(ParamBlock& target, const ParamBlock& online, double tau) {
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("soft_update: tau must be in (0, 1]");
  if (target.value.rows() != online.value.rows() || target.value.cols() != online.value.cols())
    throw std::invalid_argument("soft_update: shape mismatch");
  target.value = tau * online.value + (1.0 - tau) * target.value;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (target.blocks().size() != online.blocks().size())
    throw std::invalid_argument("soft_update: block count mismatch");
  for (size_t i = 0; i < target.blocks().size(); ++i)
    soft_update(target.blocks()[i], online.blocks()[i], tau);
}

}  // namespace alam::nn
