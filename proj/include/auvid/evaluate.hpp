#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "auvid/excitation.hpp"
#include "auvid/model.hpp"

namespace auvid::eval {

/// Held-out trajectories: every input trajectory paired with every initial
/// condition. Trajectory index = input_index * n_initial + ic_index.
struct TestSet {
  double delta = 0.01;
  int steps = 5000;
  int n_inputs = 5;
  int n_initial = 5;
  std::uint64_t seed = 0;
  std::vector<excitation::Trajectory> trajectories;
};

TestSet build_test_set(const plant::TruthParams& truth, std::uint64_t seed, int steps = 5000, double delta = 0.01,
                       int n_inputs = 5, int n_initial = 5, const excitation::ExcitationBands& bands = {});

void save_test_set(const TestSet& t, const std::filesystem::path& dir);
TestSet load_test_set(const std::filesystem::path& dir);

struct Rollout {
  std::vector<Output> z;  // z[0] = z0; shorter than N+1 when truncated
  bool diverged = false;
};

/// Open-loop Euler rollout of the model from z0. Stops at the first
/// non-finite, |z| > 1e6 or singular state and flags the rollout.
Rollout rollout_model(const models::TrainableModel& m, const Output& z0, const std::vector<Input>& inputs,
                      double delta, int steps);

/// Mean over the first z.size() samples of ||y' - z'||^2 where both sides are
/// standardized with the training statistics; the yaw difference is wrapped
/// before scaling.
double normalized_mse(const std::vector<Output>& z, const std::vector<Output>& y,
                      const excitation::NormalizationStats& stats);

/// Mean over rollout samples of the boundary penalty ||c(z_k)||_2 (unweighted).
double mean_boundary_penalty(const std::vector<Output>& z);

struct InstanceResult {
  models::Variant variant;
  int seed = 0;
  std::vector<double> mse;        // one per test trajectory
  std::vector<double> penalty;    // mean boundary penalty per test trajectory
  bool diverged = false;
  double mean_mse = 0.0;
  double mean_penalty = 0.0;
};

struct VariantSummary {
  models::Variant variant;
  std::vector<int> seeds;                // every evaluated instance
  std::vector<double> instance_means;    // parallel to seeds
  std::vector<int> retained;             // seeds inside the IQR fence
  std::vector<int> diverged;             // seeds with a diverged rollout or training run
  double mean = 0.0;                     // over retained instance means
  double std = 0.0;                      // sample std over retained instance means
  int best_seed = -1;
  double mean_penalty = 0.0;             // over non-diverged instances
  double fence_low = 0.0;
  double fence_high = 0.0;
};

struct EvalReport {
  std::vector<InstanceResult> instances;
  std::vector<VariantSummary> variants;

  const VariantSummary* find(const models::Variant& v) const;
};

struct NamedModel {
  models::TrainableModel model;
  int seed = 0;
  bool train_diverged = false;
};

InstanceResult evaluate_instance(const NamedModel& m, const TestSet& test,
                                 const excitation::NormalizationStats& stats);

std::vector<InstanceResult> evaluate_all(const std::vector<NamedModel>& models, const TestSet& test,
                                         const excitation::NormalizationStats& stats, unsigned jobs);

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> values, double p);

/// Per variant (in order of first appearance): Tukey 1.5 IQR fence on the
/// instance mean MSEs of non-diverged instances, single pass; mean, sample
/// standard deviation and best (lowest mean) seed over the retained set.
EvalReport aggregate_report(const std::vector<InstanceResult>& instances);

/// summary.csv (`variant,mean_mse,std_mse,retained,diverged,best_seed`), summary.txt,
/// mse.csv, residual_theta.csv and residual_u.csv (mean and std across test
/// trajectories of the squared normalized residual of the best instances),
/// overlay_<slug>.csv for every best instance on test trajectory 0, and plot.gp.
void emit_artifacts(const EvalReport& report, const std::vector<NamedModel>& models, const TestSet& test,
                    const excitation::NormalizationStats& stats, const std::filesystem::path& out_dir);

std::string summary_csv(const EvalReport& report);
std::string summary_text(const EvalReport& report);

}  // namespace auvid::eval
