#include "auvid/spectral.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <Eigen/SVD>

namespace auvid::nn {

void project_spectrum(Mlp& net, const SpectralBounds& bounds) {
  if (!bounds.valid()) throw std::invalid_argument("project_spectrum: invalid bounds");
  for (int l = 0; l < net.layers(); ++l) {
    auto W = net.weight(l);
    if (!W.allFinite()) {
      throw std::runtime_error("project_spectrum: non-finite weights in layer " + std::to_string(l));
    }
    Eigen::MatrixXd M = W;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();
    Eigen::VectorXd clamped = s.unaryExpr(
        [&](double v) { return std::clamp(v, bounds.sigma_min, bounds.sigma_max); });
    if ((clamped - s).cwiseAbs().maxCoeff() == 0.0) continue;  // already inside
    W = svd.matrixU() * clamped.asDiagonal() * svd.matrixV().transpose();
  }
}

Eigen::VectorXd singular_values(const Mlp& net, int l) {
  Eigen::MatrixXd M = net.weight(l);
  return Eigen::BDCSVD<Eigen::MatrixXd>(M).singularValues();
}

double spectral_violation(const Mlp& net, const SpectralBounds& bounds) {
  double worst = 0.0;
  for (int l = 0; l < net.layers(); ++l) {
    const auto s = singular_values(net, l);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      worst = std::max({worst, bounds.sigma_min - s[i], s[i] - bounds.sigma_max});
    }
  }
  return worst;
}

}  // namespace auvid::nn
