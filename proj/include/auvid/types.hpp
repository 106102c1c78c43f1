#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace auvid {

/// Full 12-element plant state, ordered (px, py, pz, theta, psi, u, w, q, r, duc, dqc, drc).
using State = Eigen::Matrix<double, 12, 1>;
/// Measurable output, ordered (theta, psi, u, q, r, duc, dqc, drc).
using Output = Eigen::Matrix<double, 8, 1>;
/// Normalized control (thrust, elevator, rudder) in [0,1] x [-1,1] x [-1,1].
using Input = Eigen::Vector3d;

inline constexpr int kStateDim = 12;
inline constexpr int kOutputDim = 8;
inline constexpr int kInputDim = 3;

namespace sx {
enum : int { px = 0, py, pz, theta, psi, u, w, q, r, duc, dqc, drc };
}  // namespace sx

namespace ox {
enum : int { theta = 0, psi, u, q, r, duc, dqc, drc };
}  // namespace ox

namespace ix {
enum : int { du = 0, dq, dr };
}  // namespace ix

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Lower/upper edges of the input box U.
inline constexpr double kInputLower[kInputDim] = {0.0, -1.0, -1.0};
inline constexpr double kInputUpper[kInputDim] = {1.0, 1.0, 1.0};

bool input_in_box(const Input& u, double tol = 0.0);

/// Raised when cos(theta) collapses in a vector field evaluation.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a model rollout leaves the finite region it can be trained on.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration; the message names the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace auvid
