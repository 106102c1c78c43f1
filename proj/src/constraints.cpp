#include "auvid/constraints.hpp"

#include <algorithm>
#include <limits>

namespace auvid::models {

ConstraintSpec ConstraintSpec::defaults(double weight) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  ConstraintSpec s;
  s.lower << -kPi / 2.0, -inf, -inf, -inf, -inf, 0.0, -1.0, -1.0;
  s.upper << kPi / 2.0, inf, inf, inf, inf, 1.0, 1.0, 1.0;
  s.weight = weight;
  return s;
}

Output constraint_violation(const Output& z, const ConstraintSpec& spec) {
  Output c;
  for (int i = 0; i < kOutputDim; ++i) {
    c[i] = std::max(0.0, -z[i] + spec.lower[i]) + std::max(0.0, z[i] - spec.upper[i]);
  }
  return c;
}

double constraint_penalty(const Output& c) { return c.norm(); }

Output constraint_penalty_grad(const Output& z, const ConstraintSpec& spec) {
  const Output c = constraint_violation(z, spec);
  const double n = c.norm();
  Output g = Output::Zero();
  if (n == 0.0) return g;
  for (int i = 0; i < kOutputDim; ++i) {
    if (z[i] < spec.lower[i]) g[i] = -c[i] / n;
    else if (z[i] > spec.upper[i]) g[i] = c[i] / n;
  }
  return spec.weight * g;
}

}  // namespace auvid::models
