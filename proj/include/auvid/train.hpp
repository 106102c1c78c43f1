#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "auvid/adamw.hpp"
#include "auvid/excitation.hpp"
#include "auvid/kvconfig.hpp"
#include "auvid/model.hpp"

namespace auvid::train {

struct TrainConfig {
  std::vector<int> schedule = excitation::kDefaultSchedule;
  int epochs = 300;
  int patience = 30;
  int graybox_epochs = 10000;  // eight parameters, microseconds per epoch
  int graybox_patience = 1000;
  double lr = 1e-3;
  double lr_graybox = 5e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double weight_decay_graybox = 0.0;
  double clip_norm = 10.0;
  bool halve_lr_per_batch = true;
  int seeds = 10;
  double delta = 0.01;
  models::ModelOptions model;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Fingerprint of every field, stored in checkpoints.
  std::string hash() const;

  /// Reads the optional `[train]` section; missing keys keep defaults.
  static TrainConfig from_document(const kv::Document& doc);
  void to_document(kv::Document& doc) const;
};

struct EpochLog {
  int batch = 0;
  int epoch = 0;
  double loss = 0.0;
  double penalty = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
};

struct TrainRun {
  models::Variant variant;
  int seed = 0;                    // index within the grid
  std::uint64_t init_seed = 0;     // seed actually used for initialization
  models::TrainableModel initial;  // model before the first optimizer step
  models::TrainableModel model;    // final trained model
  nn::AdamWState optimizer;
  std::vector<EpochLog> history;
  bool diverged = false;
  std::string diverged_at;  // "batch B epoch E: message"
  double wall_seconds = 0.0;
  std::string config_hash;
  std::filesystem::path checkpoint;
};

/// Called after every optimizer step (after projection).
using StepHook = std::function<void(const models::TrainableModel&, int batch, int epoch)>;

/// Initialization seed for (master seed, variant, seed index). Independent of
/// which other variants are trained alongside.
std::uint64_t run_seed(std::uint64_t master, const models::Variant& v, int seed_index);

/// Curriculum training over the dataset batches in order. Each batch starts
/// the rollout at its measured first output, runs up to `epochs` (graybox:
/// `graybox_epochs`) full
/// trajectory gradient steps with early stopping on training loss and keeps
/// the best parameters of the batch before moving on.
TrainRun train_model(const models::Variant& variant, const excitation::Dataset& ds, const TrainConfig& cfg,
                     const plant::TruthParams& truth, std::uint64_t init_seed, const StepHook& hook = {});

/// Tab-separated per-epoch log: batch, epoch, loss, penalty, grad norm, wall ms.
std::string format_log(const std::vector<EpochLog>& history);

/// Trains `cfg.seeds` instances of every variant. When `out_dir` is set each
/// run is written to `<out_dir>/<slug>/seed_<i>.ckpt` and `.log`.
std::vector<TrainRun> run_experiment_grid(const std::vector<models::Variant>& variants,
                                          const excitation::Dataset& ds, const TrainConfig& cfg,
                                          const plant::TruthParams& truth, std::uint64_t master_seed,
                                          unsigned jobs, const std::optional<std::filesystem::path>& out_dir);

void save_run(const TrainRun& run, const std::filesystem::path& dir);

}  // namespace auvid::train
