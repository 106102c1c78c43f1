#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "auvid/excitation.hpp"
#include "auvid/plant.hpp"

using namespace auvid;

namespace {

// Second transcription of the vehicle equations, written from scratch with
// named locals and no shared helpers.
std::array<double, 12> oracle_rhs(const std::array<double, 12>& s, const std::array<double, 3>& in,
                                  const plant::TruthParams& p) {
  const double theta = s[3], psi = s[4], u = s[5], w = s[6], q = s[7], r = s[8];
  const double duc = s[9], dqc = s[10], drc = s[11];
  std::array<double, 12> d{};
  d[0] = std::cos(psi) * (u * std::cos(theta) + w * std::sin(theta));
  d[1] = std::sin(psi) * (u * std::cos(theta) + w * std::sin(theta));
  d[2] = -u * std::sin(theta) + w * std::cos(theta);
  d[3] = q;
  d[4] = r / std::cos(theta);
  d[5] = p.X_uu * std::pow(u, 2) + p.k * duc;
  d[6] = p.Z_wabsw * std::fabs(w) * w + p.WB * std::cos(theta);
  d[7] = q * (p.M_uq * u + p.M_q) - p.B_zB * std::sin(theta) + p.b * std::pow(u, 2) * dqc;
  d[8] = r * p.N_ur * u + p.c * std::pow(u, 2) * drc;
  d[9] = -p.K_du * duc + p.K_du * in[0];
  d[10] = -p.K_dq * dqc + p.K_dq * in[1];
  d[11] = -p.K_dr * drc + p.K_dr * in[2];
  return d;
}

plant::TruthParams random_params(std::mt19937_64& g) {
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  plant::TruthParams p;
  p.X_uu = -pos(g);
  p.k = pos(g);
  p.M_uq = -pos(g);
  p.M_q = -pos(g);
  p.B_zB = pos(g);
  p.b = pos(g);
  p.N_ur = -pos(g);
  p.c = pos(g);
  p.Z_wabsw = -pos(g);
  p.WB = pos(g) - 1.5;
  p.K_du = pos(g) * 5;
  p.K_dq = pos(g) * 5;
  p.K_dr = pos(g) * 5;
  return p;
}

}  // namespace

TEST_CASE("truth_rhs agrees with an independent transcription") {
  std::mt19937_64 g(17);
  std::uniform_real_distribution<double> any(-3.0, 3.0), th(-1.5, 1.5), unit(0.0, 1.0), sym(-1.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const auto p = random_params(g);
    State x;
    std::array<double, 12> s{};
    for (int i = 0; i < 12; ++i) s[i] = x[i] = any(g);
    s[3] = x[sx::theta] = th(g);
    Input u(unit(g), sym(g), sym(g));
    const auto ref = oracle_rhs(s, {u[0], u[1], u[2]}, p);
    const State d = plant::truth_rhs(x, u, p);
    for (int i = 0; i < 12; ++i) worst = std::max(worst, std::abs(d[i] - ref[i]) / std::max(1.0, std::abs(ref[i])));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("truth_rhs rejects pitch at the kinematic singularity") {
  State x = State::Zero();
  x[sx::theta] = kPi / 2;
  CHECK_THROWS_AS(plant::truth_rhs(x, Input::Zero(), plant::TruthParams::defaults()), SingularityError);
}

TEST_CASE("RK4 self-convergence is fourth order") {
  const auto p = plant::TruthParams::defaults();
  State x0 = State::Zero();
  x0[sx::theta] = 0.3;
  x0[sx::psi] = 0.2;
  x0[sx::u] = 1.2;
  x0[sx::w] = 0.1;
  x0[sx::q] = 0.1;
  x0[sx::r] = -0.1;
  x0[sx::duc] = 0.4;
  const double T = 2.0;
  const Input in(0.7, 0.3, -0.4);
  auto endpoint = [&](double delta) {
    const int n = static_cast<int>(std::lround(T / delta));
    std::vector<Input> inputs(n, in);
    return plant::integrate_truth(x0, inputs, p, delta, n).back();
  };
  const State ref = endpoint(0.1 / 16);
  auto err = [&](double delta) {
    State d = endpoint(delta) - ref;
    d[sx::psi] = wrap_angle(d[sx::psi]);
    return d.norm();
  };
  const double e1 = err(0.1), e2 = err(0.05), e3 = err(0.025);
  const double order1 = std::log2(e1 / e2);
  const double order2 = std::log2(e2 / e3);
  MESSAGE("observed orders " << order1 << ", " << order2);
  CHECK(order1 >= 3.5);
  CHECK(order2 >= 3.5);
}

TEST_CASE("delay states follow the first-order lag closed form") {
  auto p = plant::TruthParams::defaults();
  State x0 = State::Zero();
  x0[sx::u] = 1.0;
  x0[sx::duc] = 0.1;
  x0[sx::dqc] = -0.8;
  x0[sx::drc] = 0.5;
  const Input target(0.9, 0.6, -0.2);
  const double delta = 0.01;
  const int n = 300;
  std::vector<Input> inputs(n, target);
  const auto xs = plant::integrate_truth(x0, inputs, p, delta, n);
  const double K[3] = {p.K_du, p.K_dq, p.K_dr};
  const int idx[3] = {sx::duc, sx::dqc, sx::drc};
  double worst = 0.0;
  for (int k = 0; k <= n; ++k) {
    for (int c = 0; c < 3; ++c) {
      const double t = k * delta;
      const double exact = target[c] + (x0[idx[c]] - target[c]) * std::exp(-K[c] * t);
      worst = std::max(worst, std::abs(xs[k][idx[c]] - exact));
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("integration wraps yaw and keeps delayed commands in the input box") {
  const auto p = plant::TruthParams::defaults();
  const auto traj = excitation::simulate_trajectory(p, 2000, 0.01, 99);
  for (const auto& x : traj.states) {
    CHECK(x[sx::psi] > -kPi);
    CHECK(x[sx::psi] <= kPi);
    CHECK(x[sx::duc] >= -1e-9);
    CHECK(x[sx::duc] <= 1 + 1e-9);
    CHECK(std::abs(x[sx::dqc]) <= 1 + 1e-9);
    CHECK(std::abs(x[sx::drc]) <= 1 + 1e-9);
  }
}

TEST_CASE("wrap_angle maps onto (-pi, pi]") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_angle(0.25) == 0.25);
}

TEST_CASE("output_map and lift round-trip the measured slots") {
  State x;
  for (int i = 0; i < 12; ++i) x[i] = 0.1 * (i + 1);
  const Output y = plant::output_map(x);
  CHECK(y[ox::theta] == x[sx::theta]);
  CHECK(y[ox::psi] == x[sx::psi]);
  CHECK(y[ox::u] == x[sx::u]);
  CHECK(y[ox::q] == x[sx::q]);
  CHECK(y[ox::r] == x[sx::r]);
  CHECK(y[ox::drc] == x[sx::drc]);
  const State l = plant::lift(y);
  CHECK(plant::output_map(l) == y);
  CHECK(l[sx::px] == 0.0);
  CHECK(l[sx::w] == 0.0);
}

TEST_CASE("truth params files") {
  const auto dir = std::filesystem::temp_directory_path() / "auvid_test_params";
  std::filesystem::create_directories(dir);
  const auto file = dir / "p.ini";

  SUBCASE("round trip") {
    plant::save_truth_params(plant::TruthParams::defaults(), file);
    CHECK(plant::load_truth_params(file) == plant::TruthParams::defaults());
  }
  SUBCASE("shipped file loads") {
    const auto p = plant::load_truth_params(std::filesystem::path(AUVID_SOURCE_DIR) / "config" / "truth_params.ini");
    CHECK(p == plant::TruthParams::defaults());
  }
  SUBCASE("unknown key") {
    plant::save_truth_params(plant::TruthParams::defaults(), file);
    std::ofstream(file, std::ios::app) << "extra = 1\n";
    CHECK_THROWS_AS(plant::load_truth_params(file), ConfigError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(plant::load_truth_params(dir / "nope.ini"), ConfigError); }
  SUBCASE("sign constraint") {
    auto p = plant::TruthParams::defaults();
    p.X_uu = 0.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
  std::filesystem::remove_all(dir);
}
