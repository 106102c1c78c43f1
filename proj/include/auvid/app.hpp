#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "auvid/excitation.hpp"
#include "auvid/train.hpp"

namespace auvid::app {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

struct EvalConfig {
  int test_steps = 5000;
  int test_inputs = 5;
  int test_initial = 5;
};

/// Everything a pipeline stage needs, fully validated on load.
///
/// Config file sections: [run] (params, seed, jobs), [dataset] (schedule,
/// delta), [excitation], [train], [eval]. Relative paths are resolved against
/// the config file's directory.
struct AppConfig {
  std::optional<std::filesystem::path> params_path;
  plant::TruthParams truth = plant::TruthParams::defaults();
  std::uint64_t seed = 1;
  unsigned jobs = 0;  // 0: logical cores
  double delta = 0.01;
  excitation::ExcitationBands bands;
  train::TrainConfig train;
  EvalConfig eval;
  std::string preset = "standard";

  /// Loads the config (if any), applies the preset, then reads the params file.
  static AppConfig load(const std::optional<std::filesystem::path>& config_file, const std::string& preset,
                        const std::optional<std::filesystem::path>& params_override,
                        const std::optional<std::uint64_t>& seed_override,
                        const std::optional<unsigned>& jobs_override);

  /// `small`: 5 seeds, 80 epochs per batch; schedule and test set as `standard`.
  void apply_preset(const std::string& name);
  void validate() const;
  unsigned effective_jobs() const;
  kv::Document to_document() const;
  std::string hash() const;
};

struct GlobalArgs {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  std::string preset = "standard";
  std::optional<std::filesystem::path> params;
};

struct GenDataArgs {
  std::filesystem::path out;
  std::optional<std::vector<int>> schedule;
  std::optional<double> delta;
};

struct TrainArgs {
  std::string variant;
  std::filesystem::path dataset;
  std::optional<int> seeds;
  std::filesystem::path out;
};

struct GenTestArgs {
  std::filesystem::path out;
};

struct EvalArgs {
  std::filesystem::path runs;
  std::filesystem::path test;
  std::filesystem::path dataset;
  std::filesystem::path out;
};

struct ReportArgs {
  std::filesystem::path eval;
  std::string format = "txt";
};

struct FullArgs {
  std::filesystem::path out;
  std::optional<std::vector<std::string>> variants;
};

int cmd_gen_data(const GlobalArgs& g, const GenDataArgs& a, std::ostream& out, std::ostream& err);
int cmd_train(const GlobalArgs& g, const TrainArgs& a, std::ostream& out, std::ostream& err);
int cmd_gen_test(const GlobalArgs& g, const GenTestArgs& a, std::ostream& out, std::ostream& err);
int cmd_eval(const GlobalArgs& g, const EvalArgs& a, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err);
int cmd_full_experiment(const GlobalArgs& g, const FullArgs& a, std::ostream& out, std::ostream& err);

struct LoadedRun {
  std::filesystem::path file;
  models::TrainableModel model;
  int seed = 0;
  bool diverged = false;
};

/// Loads every `<runs>/<slug>/seed_<i>.ckpt`, sorted by variant order then seed.
std::vector<LoadedRun> load_runs(const std::filesystem::path& runs_dir);

}  // namespace auvid::app
