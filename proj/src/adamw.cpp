#include "auvid/adamw.hpp"

#include <cmath>
#include <stdexcept>

namespace auvid::nn {

void adamw_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
                AdamWState& s) {
  if (params.size() != grad.size() || params.size() != s.m.size() || params.size() != s.v.size()) {
    throw std::invalid_argument("adamw_step: shape mismatch");
  }
  ++s.step;
  const auto& c = s.cfg;
  s.m = c.beta1 * s.m + (1.0 - c.beta1) * grad;
  s.v = c.beta2 * s.v + (1.0 - c.beta2) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(s.step));
  if (c.weight_decay != 0.0) params *= 1.0 - c.lr * c.weight_decay;
  params.array() -= c.lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + c.eps);
}

double clip_global_norm(Eigen::Ref<Eigen::VectorXd> grad, double max_norm) {
  const double n = grad.norm();
  if (n > max_norm && n > 0.0) grad *= max_norm / n;
  return n;
}

}  // namespace auvid::nn
