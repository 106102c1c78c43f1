#include <doctest.h>

#include <cmath>
#include <numeric>

#include "auvid/bptt.hpp"
#include "auvid/excitation.hpp"
#include "auvid/model.hpp"
#include "auvid/plant.hpp"

using namespace auvid;
using namespace auvid::models;

namespace {

struct Problem {
  Output z0;
  std::vector<Input> inputs;
  std::vector<Output> targets;
};

Problem make_problem(int N, std::uint64_t seed) {
  const auto traj = excitation::simulate_trajectory(plant::TruthParams::defaults(), std::max(N, 50), 0.01, seed);
  return {traj.outputs.front(), {traj.inputs.begin(), traj.inputs.begin() + N},
          {traj.outputs.begin(), traj.outputs.begin() + N + 1}};
}

// Relative error of the BPTT gradient against central differences of the
// loss on `probes` random coordinates. Components far below the largest one
// drown in cancellation noise, so the denominator is floored at 1e-6 of the
// gradient's max norm.
double fd_check(TrainableModel m, const Problem& pb, int probes, std::uint64_t seed, const ConstraintSpec* c) {
  const double delta = 0.01, h = 1e-5;
  const auto res = nn::bptt_trajectory_grad(m, pb.z0, pb.inputs, pb.targets, delta, c);
  const Eigen::VectorXd p0 = m.trainable_params();
  const double floor = std::max(1e-12, 1e-6 * res.grad.lpNorm<Eigen::Infinity>());
  excitation::Rng rng(seed);
  std::vector<Eigen::Index> idx(p0.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min<std::size_t>(idx.size(), probes));
  double worst = 0.0;
  for (auto i : idx) {
    Eigen::VectorXd p = p0;
    p[i] += h;
    m.set_trainable_params(p);
    const double lp = nn::rollout_loss(m, pb.z0, pb.inputs, pb.targets, delta, c);
    p[i] -= 2 * h;
    m.set_trainable_params(p);
    const double lm = nn::rollout_loss(m, pb.z0, pb.inputs, pb.targets, delta, c);
    const double fd = (lp - lm) / (2 * h);
    worst = std::max(worst, std::abs(fd - res.grad[i]) / std::max(floor, std::abs(fd)));
  }
  m.set_trainable_params(p0);
  return worst;
}

}  // namespace

TEST_CASE("zero field on constant data has zero loss and gradient") {
  excitation::Rng rng(1);
  ModelOptions opt;
  opt.mlp_dims = {11, 8, 8};
  auto m = TrainableModel::make(Variant::parse("blackbox"), plant::TruthParams::defaults(), rng, opt);
  m.mlp->params().setZero();
  Output z0 = Output::Zero();
  z0[ox::duc] = 0.5;
  std::vector<Input> u(10, Input(0.5, 0, 0));
  std::vector<Output> y(11, z0);
  const auto spec = ConstraintSpec::defaults();
  const auto res = nn::bptt_trajectory_grad(m, z0, u, y, 0.01, &spec);
  CHECK(res.loss == 0.0);
  CHECK(res.grad.norm() == 0.0);
}

TEST_CASE("one step through a linear layer matches the chain rule") {
  excitation::Rng rng(2);
  ModelOptions opt;
  opt.mlp_dims = {11, 8};
  auto m = TrainableModel::make(Variant::parse("blackbox"), plant::TruthParams::defaults(), rng, opt);
  const auto pb = make_problem(50, 3);
  std::vector<Output> y = {pb.targets[0], pb.targets[1]};
  const double delta = 0.01;
  const auto res = nn::bptt_trajectory_grad(m, pb.z0, pb.inputs, y, delta, nullptr);
  // L = ||y1 - z0 - delta (W x + b)||^2 with x = [z0; u0]
  Eigen::VectorXd x(11);
  x << pb.z0, pb.inputs[0];
  const Output r = y[1] - pb.z0 - delta * (m.mlp->weight(0) * x + m.mlp->bias(0));
  const Eigen::MatrixXd dW = -2.0 * delta * r * x.transpose();
  const Eigen::VectorXd db = -2.0 * delta * r;
  CHECK(res.loss == doctest::Approx(r.squaredNorm()).epsilon(1e-14));
  Eigen::Map<const nn::RowMat> gW(res.grad.data(), 8, 11);
  CHECK((gW - dW).norm() < 1e-14);
  CHECK((res.grad.tail(8) - db).norm() < 1e-14);
}

TEST_CASE("BPTT matches finite differences for every family") {
  const auto truth = plant::TruthParams::defaults();
  const auto pb = make_problem(20, 8);
  for (const auto& v : Variant::all()) {
    CAPTURE(v.name());
    excitation::Rng rng(10);
    auto m = TrainableModel::make(v, truth, rng);
    const ConstraintSpec* c = m.constraint ? &*m.constraint : nullptr;
    CHECK(fd_check(m, pb, 50, 99, c) <= 1e-4);
  }
}

TEST_CASE("penalty gradient flows through the rollout") {
  const auto truth = plant::TruthParams::defaults();
  auto pb = make_problem(20, 9);
  // Targets far outside the box pull the rollout across the boundary.
  for (auto& y : pb.targets) y[ox::theta] = 3.0;
  excitation::Rng rng(11);
  ModelOptions opt;
  opt.mlp_dims = {11, 16, 8};
  auto m = TrainableModel::make(Variant::parse("cblackbox"), truth, rng, opt);
  Eigen::VectorXd p = m.trainable_params();
  p *= 5.0;
  m.set_trainable_params(p);
  const auto spec = ConstraintSpec::defaults(5.0);
  const auto res = nn::bptt_trajectory_grad(m, pb.z0, pb.inputs, pb.targets, 0.01, &spec);
  CHECK(res.penalty > 0.0);
  const auto free = nn::bptt_trajectory_grad(m, pb.z0, pb.inputs, pb.targets, 0.01, nullptr);
  CHECK((res.grad - free.grad).norm() > 1e-3);
  CHECK(fd_check(m, pb, 50, 5, &spec) <= 1e-4);
}

TEST_CASE("yaw residual is taken on the circle") {
  Output y = Output::Zero(), z = Output::Zero();
  y[ox::psi] = kPi - 0.1;
  z[ox::psi] = -kPi + 0.1;
  CHECK(nn::output_residual(y, z)[ox::psi] == doctest::Approx(-0.2));
}

TEST_CASE("runaway rollouts raise a divergence error") {
  excitation::Rng rng(12);
  ModelOptions opt;
  opt.mlp_dims = {11, 8};
  auto m = TrainableModel::make(Variant::parse("blackbox"), plant::TruthParams::defaults(), rng, opt);
  m.mlp->params().setZero();
  m.mlp->bias(0).setConstant(1e9);
  const auto pb = make_problem(50, 3);
  CHECK_THROWS_AS(nn::bptt_trajectory_grad(m, pb.z0, pb.inputs, pb.targets, 0.01, nullptr), DivergenceError);
}
