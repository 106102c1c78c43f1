#include "auvid/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace auvid::nn {

Mlp::Mlp(std::vector<int> dims, Activation hidden) : dims_(std::move(dims)), hidden_(hidden) {
  if (dims_.size() < 2) throw std::invalid_argument("Mlp needs at least one layer");
  Eigen::Index n = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    if (dims_[l] <= 0 || dims_[l + 1] <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
    offsets_.push_back(n);
    n += Eigen::Index(dims_[l + 1]) * dims_[l] + dims_[l + 1];
  }
  params_ = Vec::Zero(n);
}

std::vector<int> Mlp::default_dims() { return {kOutputDim + kInputDim, 128, 128, 128, 128, kOutputDim}; }

MatMap Mlp::weight(int l) { return MatMap(params_.data() + offsets_[l], dims_[l + 1], dims_[l]); }

ConstMatMap Mlp::weight(int l) const {
  return ConstMatMap(params_.data() + offsets_[l], dims_[l + 1], dims_[l]);
}

Eigen::Map<Vec> Mlp::bias(int l) { return Eigen::Map<Vec>(params_.data() + bias_offset(l), dims_[l + 1]); }

Eigen::Map<const Vec> Mlp::bias(int l) const {
  return Eigen::Map<const Vec>(params_.data() + bias_offset(l), dims_[l + 1]);
}

void Mlp::init_uniform_fan_in(excitation::Rng& rng) {
  for (int l = 0; l < layers(); ++l) {
    std::uniform_real_distribution<double> dist(-1.0 / std::sqrt(dims_[l]), 1.0 / std::sqrt(dims_[l]));
    auto W = weight(l);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = dist(rng);
    }
    auto b = bias(l);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = dist(rng);
  }
}

bool Mlp::operator==(const Mlp& other) const {
  return dims_ == other.dims_ && hidden_ == other.hidden_ && params_.size() == other.params_.size() &&
         params_ == other.params_;
}

Vec mlp_forward(const Mlp& net, const Eigen::Ref<const Vec>& x, MlpCache* cache) {
  if (x.size() != net.in_dim()) throw std::invalid_argument("mlp_forward: input size mismatch");
  Vec h = x;
  if (cache) {
    cache->acts.resize(net.layers() + 1);
    cache->acts[0] = h;
  }
  for (int l = 0; l < net.layers(); ++l) {
    Vec a = net.weight(l) * h + net.bias(l);
    const bool hidden = l + 1 < net.layers();
    if (hidden && net.hidden_activation() == Activation::Tanh) a = a.array().tanh();
    h = std::move(a);
    if (cache) cache->acts[l + 1] = h;
  }
  return h;
}

Vec mlp_forward(const Mlp& net, const Output& z, const Input& u, MlpCache* cache) {
  Vec x(kOutputDim + kInputDim);
  x << z, u;
  return mlp_forward(net, x, cache);
}

Vec mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::Ref<const Vec>& upstream,
                 Eigen::Ref<Vec> grad) {
  if (upstream.size() != net.out_dim()) throw std::invalid_argument("mlp_backward: upstream size mismatch");
  if (static_cast<int>(cache.acts.size()) != net.layers() + 1) {
    throw std::invalid_argument("mlp_backward: cache does not match network");
  }
  Vec g = upstream;
  for (int l = net.layers() - 1; l >= 0; --l) {
    const Vec& in = cache.acts[l];
    MatMap dW(grad.data() + net.weight_offset(l), net.dims()[l + 1], net.dims()[l]);
    dW.noalias() += g * in.transpose();
    grad.segment(net.bias_offset(l), net.dims()[l + 1]) += g;
    Vec prev = net.weight(l).transpose() * g;
    if (l > 0 && net.hidden_activation() == Activation::Tanh) {
      prev.array() *= 1.0 - in.array().square();
    }
    g = std::move(prev);
  }
  return g;
}

}  // namespace auvid::nn
