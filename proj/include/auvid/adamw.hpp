#pragma once

#include <Eigen/Core>

namespace auvid::nn {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// Moment accumulators for one flat parameter vector.
struct AdamWState {
  AdamWConfig cfg;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long long step = 0;

  AdamWState() = default;
  AdamWState(Eigen::Index n, AdamWConfig c) : cfg(c), m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// Decoupled weight decay Adam (Loshchilov & Hutter):
///   p <- p - lr * wd * p
///   p <- p - lr * mhat / (sqrt(vhat) + eps)
void adamw_step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad,
                AdamWState& state);

/// Scales grad in place so its 2-norm is at most max_norm; returns the norm before clipping.
double clip_global_norm(Eigen::Ref<Eigen::VectorXd> grad, double max_norm);

}  // namespace auvid::nn
