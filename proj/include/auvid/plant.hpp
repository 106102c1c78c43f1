#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "auvid/types.hpp"

namespace auvid::plant {

inline constexpr double kCosThetaEps = 1e-9;

/// Ground-truth coefficients. The delay gains are stored with the
/// orientation that converges: d/dt dc = K (d - dc) with K > 0.
struct TruthParams {
  double X_uu = 0.0;
  double k = 0.0;
  double M_uq = 0.0;
  double M_q = 0.0;
  double B_zB = 0.0;
  double b = 0.0;
  double N_ur = 0.0;
  double c = 0.0;
  double Z_wabsw = 0.0;
  double WB = 0.0;
  double K_du = 0.0;
  double K_dq = 0.0;
  double K_dr = 0.0;

  /// The eight hydrodynamic coefficients identified by the graybox, in order
  /// (X_uu, k, M_uq, M_q, B_zB, b, N_ur, c).
  Eigen::Matrix<double, 8, 1> mu() const;

  /// Synthetic Iver3-like defaults, trimmed (WB = 0).
  static TruthParams defaults();

  /// Throws ConfigError when a sign constraint is broken.
  void validate() const;

  bool operator==(const TruthParams&) const = default;
};

/// Names of the eight mu coefficients, in mu() order.
inline constexpr const char* kMuNames[8] = {"X_uu", "k", "M_uq", "M_q", "B_zB", "b", "N_ur", "c"};

State truth_rhs(const State& x, const Input& u, const TruthParams& p);

Output output_map(const State& x);

/// Inverse of output_map on the measured slots; unmeasured slots are zero.
State lift(const Output& y);

/// Fixed-step RK4 with zero-order-hold input. `inputs` holds at least N samples;
/// step k integrates over [k delta, (k+1) delta] holding inputs[k]. Yaw is
/// re-wrapped after every step. The three delay states are linear under the
/// held input and take their exact exponential update. Returns N+1 states.
std::vector<State> integrate_truth(const State& x0, const std::vector<Input>& inputs,
                                   const TruthParams& p, double delta, int steps);

/// Same integrator over an arbitrary right-hand side, used by tests.
std::vector<State> rk4(const State& x0, const std::vector<Input>& inputs, double delta, int steps,
                       const std::function<State(const State&, const Input&)>& rhs);

/// Reads the `truth_params` section of a key-value config file. Unknown keys
/// and missing keys are errors.
TruthParams load_truth_params(const std::filesystem::path& file);
void save_truth_params(const TruthParams& p, const std::filesystem::path& file);

}  // namespace auvid::plant
