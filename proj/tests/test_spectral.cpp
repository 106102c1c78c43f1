#include <doctest.h>

#include <Eigen/SVD>

#include "auvid/spectral.hpp"

using namespace auvid;
using namespace auvid::nn;

namespace {

Eigen::VectorXd jacobi_sv(const Mlp& net, int l) {
  const Eigen::MatrixXd W = net.weight(l);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(W).singularValues();
}

}  // namespace

TEST_CASE("scaled identity clamps to the upper bound") {
  Mlp net({5, 5});
  net.params().setZero();
  net.weight(0) = 3.0 * RowMat::Identity(5, 5);
  net.bias(0).setConstant(7.0);
  project_spectrum(net, {0.5, 1.0});
  CHECK((net.weight(0) - RowMat::Identity(5, 5)).norm() < 1e-12);
  CHECK(net.bias(0) == Vec::Constant(5, 7.0));
}

TEST_CASE("matrices inside the bounds are unchanged") {
  Mlp net({4, 4});
  net.params().setZero();
  net.weight(0) = 0.75 * RowMat::Identity(4, 4);
  net.weight(0)(0, 1) = 0.01;
  const Vec before = net.params();
  project_spectrum(net, {0.5, 1.0});
  CHECK((net.params() - before).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("random networks land inside the bounds") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Mlp net(Mlp::default_dims());
    excitation::Rng rng(s);
    net.init_uniform_fan_in(rng);
    net.params() *= 4.0;
    for (SpectralBounds b : {SpectralBounds{0.5, 1.0}, SpectralBounds{0.0, 1.0}}) {
      Mlp copy = net;
      project_spectrum(copy, b);
      for (int l = 0; l < copy.layers(); ++l) {
        const Eigen::VectorXd sv = jacobi_sv(copy, l);
        CHECK(sv.maxCoeff() <= b.sigma_max + 1e-6);
        CHECK(sv.minCoeff() >= b.sigma_min - 1e-6);
      }
      CHECK(spectral_violation(copy, b) <= 1e-6);
    }
  }
}

TEST_CASE("1-Lipschitz after projection with sigma_max = 1") {
  Mlp net(Mlp::default_dims());
  excitation::Rng rng(12);
  net.init_uniform_fan_in(rng);
  net.params() *= 3.0;
  project_spectrum(net, {0.5, 1.0});
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  double worst = 0.0;
  for (int n = 0; n < 2000; ++n) {
    Output a, b;
    Input u;
    for (int i = 0; i < 8; ++i) {
      a[i] = d(rng);
      b[i] = a[i] + 0.1 * d(rng);
    }
    for (int i = 0; i < 3; ++i) u[i] = d(rng);
    const double ratio = (mlp_forward(net, a, u) - mlp_forward(net, b, u)).norm() / (a - b).norm();
    worst = std::max(worst, ratio);
  }
  CHECK(worst <= 1.0 + 1e-6);
}

TEST_CASE("non-finite weights abort the projection") {
  Mlp net({3, 3});
  net.params().setZero();
  net.weight(0)(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(project_spectrum(net, {0.0, 1.0}), std::runtime_error);
}
