#pragma once

#include <vector>

#include "auvid/mlp.hpp"

namespace auvid::nn {

struct SpectralBounds {
  double sigma_min = 0.0;
  double sigma_max = 1.0;

  bool valid() const { return sigma_min >= 0.0 && sigma_min <= sigma_max; }
  bool operator==(const SpectralBounds&) const = default;
};

/// Clamps every singular value of every weight matrix into the bounds and
/// rebuilds the matrix from its SVD. Biases are left alone. Throws
/// std::runtime_error on non-finite weights.
void project_spectrum(Mlp& net, const SpectralBounds& bounds);

/// Singular values of layer l, descending.
Eigen::VectorXd singular_values(const Mlp& net, int l);

/// Largest distance of any singular value outside the bounds (0 if all inside).
double spectral_violation(const Mlp& net, const SpectralBounds& bounds);

}  // namespace auvid::nn
