#pragma once

#include <vector>

#include <Eigen/Core>

#include "auvid/excitation.hpp"
#include "auvid/types.hpp"

namespace auvid::nn {

using Vec = Eigen::VectorXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

enum class Activation { Tanh, Identity };

/// Dense network with every parameter in one flat vector. Layer l stores its
/// weight matrix (out x in, row-major) followed by its bias.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> dims, Activation hidden = Activation::Tanh);

  /// [11, 128, 128, 128, 128, 8]: output + input in, vector field out.
  static std::vector<int> default_dims();

  int layers() const { return static_cast<int>(dims_.size()) - 1; }
  int in_dim() const { return dims_.front(); }
  int out_dim() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  Activation hidden_activation() const { return hidden_; }

  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  MatMap weight(int l);
  ConstMatMap weight(int l) const;
  Eigen::Map<Vec> bias(int l);
  Eigen::Map<const Vec> bias(int l) const;

  /// Offsets into params() for layer l's weight and bias blocks.
  Eigen::Index weight_offset(int l) const { return offsets_[l]; }
  Eigen::Index bias_offset(int l) const { return offsets_[l] + Eigen::Index(dims_[l + 1]) * dims_[l]; }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
  void init_uniform_fan_in(excitation::Rng& rng);

  bool operator==(const Mlp& other) const;

 private:
  std::vector<int> dims_;
  std::vector<Eigen::Index> offsets_;
  Activation hidden_ = Activation::Tanh;
  Vec params_;
};

/// Post-activation values of every layer; acts[0] is the input.
struct MlpCache {
  std::vector<Vec> acts;
};

Vec mlp_forward(const Mlp& net, const Eigen::Ref<const Vec>& x, MlpCache* cache = nullptr);

/// Convenience overload on (z, u) with the input layout [z; u].
Vec mlp_forward(const Mlp& net, const Output& z, const Input& u, MlpCache* cache = nullptr);

/// Reverse pass. Adds d(upstream . f)/d(params) into `grad` (same layout as
/// params()) and returns d(upstream . f)/d(input).
Vec mlp_backward(const Mlp& net, const MlpCache& cache, const Eigen::Ref<const Vec>& upstream,
                 Eigen::Ref<Vec> grad);

}  // namespace auvid::nn
