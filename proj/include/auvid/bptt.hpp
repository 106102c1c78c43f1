#pragma once

#include <cmath>
#include <concepts>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "auvid/constraints.hpp"
#include "auvid/types.hpp"

namespace auvid::nn {

inline constexpr double kDivergenceBound = 1e6;

/// A vector field with a reverse-mode product over its trainable parameters.
template <class F>
concept DifferentiableField =
    requires(const F& f, const Output& z, const Input& u, const Output& v, typename F::Cache c,
             Eigen::VectorXd& g) {
      { f.rhs(z, u, &c) } -> std::convertible_to<Output>;
      { f.vjp(z, u, v, c, g) } -> std::convertible_to<Output>;
      { f.n_trainable() } -> std::convertible_to<Eigen::Index>;
    };

struct BpttResult {
  double loss = 0.0;     // mse + weighted penalty, averaged over steps
  double mse = 0.0;      // averaged squared error part
  double penalty = 0.0;  // averaged weighted penalty part
  Eigen::VectorXd grad;
};

/// Output difference y - z with the yaw entry taken on the circle.
inline Output output_residual(const Output& y, const Output& z) {
  Output d = y - z;
  d[ox::psi] = wrap_angle(d[ox::psi]);
  return d;
}

/// Euler rollout z_{k+1} = z_k + delta f(z_k, u_k) from z_0 = y_0 with loss
///
///   L = (1/N) sum_{k=1..N} ( ||y_k - z_k||^2 + w ||c(z_k)||_2 )
///
/// and its exact gradient through the whole unrolled chain. `constraint` may
/// be null (no penalty). Throws DivergenceError when |z| exceeds 1e6 or turns
/// non-finite.
template <DifferentiableField F>
BpttResult bptt_trajectory_grad(const F& model, const Output& z0, const std::vector<Input>& inputs,
                                const std::vector<Output>& targets, double delta,
                                const models::ConstraintSpec* constraint) {
  const int N = static_cast<int>(targets.size()) - 1;
  if (N < 1 || inputs.size() < static_cast<std::size_t>(N)) {
    throw std::invalid_argument("bptt_trajectory_grad: need N >= 1 aligned inputs and targets");
  }
  std::vector<Output> zs(N + 1);
  std::vector<typename F::Cache> caches(N);
  zs[0] = z0;
  BpttResult res;
  double mse = 0.0;
  double pen = 0.0;
  for (int k = 0; k < N; ++k) {
    const Output f = model.rhs(zs[k], inputs[k], &caches[k]);
    zs[k + 1] = zs[k] + delta * f;
    const Output& z = zs[k + 1];
    if (!z.allFinite() || z.cwiseAbs().maxCoeff() > kDivergenceBound) {
      throw DivergenceError("rollout diverged at step " + std::to_string(k + 1));
    }
    mse += output_residual(targets[k + 1], z).squaredNorm();
    if (constraint) pen += constraint->weight * models::constraint_penalty(models::constraint_violation(z, *constraint));
  }
  res.mse = mse / N;
  res.penalty = pen / N;
  res.loss = res.mse + res.penalty;

  res.grad = Eigen::VectorXd::Zero(model.n_trainable());
  // lambda = dL/dz_{k+1}, accumulated backwards.
  Output lambda = Output::Zero();
  for (int k = N - 1; k >= 0; --k) {
    const Output& z = zs[k + 1];
    Output local = -2.0 * output_residual(targets[k + 1], z);
    if (constraint) local += models::constraint_penalty_grad(z, *constraint);
    lambda += local / N;
    // z_{k+1} = z_k + delta f(z_k): dL/dz_k = lambda + delta (df/dz_k)^T lambda
    const Output v = delta * lambda;
    lambda += model.vjp(zs[k], inputs[k], v, caches[k], res.grad);
  }
  return res;
}

/// Loss only, sharing the exact forward path of bptt_trajectory_grad.
template <DifferentiableField F>
double rollout_loss(const F& model, const Output& z0, const std::vector<Input>& inputs,
                    const std::vector<Output>& targets, double delta, const models::ConstraintSpec* constraint) {
  const int N = static_cast<int>(targets.size()) - 1;
  Output z = z0;
  double total = 0.0;
  for (int k = 0; k < N; ++k) {
    z = z + delta * model.rhs(z, inputs[k], nullptr);
    total += output_residual(targets[k + 1], z).squaredNorm();
    if (constraint) total += constraint->weight * models::constraint_penalty(models::constraint_violation(z, *constraint));
  }
  return total / N;
}

}  // namespace auvid::nn
