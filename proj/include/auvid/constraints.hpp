#pragma once

#include "auvid/types.hpp"

namespace auvid::models {

/// Box on the model output. Infinite entries disable that side.
struct ConstraintSpec {
  Output lower;
  Output upper;
  double weight = 1.0;

  /// theta in [-pi/2, pi/2], delayed commands in U, everything else free.
  static ConstraintSpec defaults(double weight = 1.0);
};

/// c_i(z) = max(0, lower_i - z_i) + max(0, z_i - upper_i).
Output constraint_violation(const Output& z, const ConstraintSpec& spec);

/// p_c(c) = ||c||_2 (unweighted).
double constraint_penalty(const Output& c);

/// Subgradient of weight * ||c(z)||_2 with respect to z. Zero whenever c(z) = 0,
/// including exactly on the boundary.
Output constraint_penalty_grad(const Output& z, const ConstraintSpec& spec);

}  // namespace auvid::models
