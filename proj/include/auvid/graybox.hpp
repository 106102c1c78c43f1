#pragma once

#include "auvid/excitation.hpp"
#include "auvid/plant.hpp"

namespace auvid::models {

using MuVec = Eigen::Matrix<double, 8, 1>;

/// Estimated coefficients. `mu` follows TruthParams::mu() ordering
/// (X_uu, k, M_uq, M_q, B_zB, b, N_ur, c); the delay gains are fixed copies of
/// the truth values and never trained.
struct GrayboxParams {
  MuVec mu = MuVec::Zero();
  Eigen::Vector3d K = Eigen::Vector3d::Zero();

  static GrayboxParams from_truth(const plant::TruthParams& p);
  bool operator==(const GrayboxParams&) const = default;
};

namespace mu_index {
enum : int { X_uu = 0, k, M_uq, M_q, B_zB, b, N_ur, c };
}

/// mu_hat_i ~ U([min(mu_i (1-e), mu_i (1+e)), max(...)]); delay gains copied.
GrayboxParams sample_offset_params(const plant::TruthParams& truth, double e_mu, excitation::Rng& rng);

/// The structured vector field on the output z = (theta, psi, u, q, r, duc, dqc, drc):
///
///   theta' = q
///   psi'   = r / cos(theta)
///   u'     = X_uu u^2 + k duc
///   q'     = M_uq u q + M_q q - B_zB sin(theta) + b u^2 dqc
///   r'     = N_ur u r + c u^2 drc
///   dxc'   = K_x (dx - dxc)            for x in {u, q, r}
///
/// The hydrodynamic rows read the delayed commands held in z, as the plant does.
Output graybox_rhs(const GrayboxParams& p, const Output& z, const Input& u);

/// Vector-Jacobian product of graybox_rhs: returns v^T df/dz and adds
/// v^T df/dmu into `dmu`.
Output graybox_vjp(const GrayboxParams& p, const Output& z, const Input& u, const Output& v, MuVec& dmu);

}  // namespace auvid::models
