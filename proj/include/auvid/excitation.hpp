#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "auvid/plant.hpp"

namespace auvid::excitation {

using Rng = std::mt19937_64;

/// Independent stream for (master seed, stream index).
Rng derive_rng(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

enum class BaseSegmentKind { Step, Periodic, Spline };

inline constexpr int kBaseSegments = 50;

/// Ranges for the randomized excitation and the initial-condition sampler.
/// The values are synthetic; they only have to keep the plant inside M.
struct ExcitationBands {
  double freq_min_hz = 0.05;
  double freq_max_hz = 0.5;
  int spline_knots = 4;
  double theta_fraction = 0.9;  // theta ~ U(+-fraction * pi/2)
  double u_min = 0.5;
  double u_max = 2.5;
  double rate_max = 0.2;  // q, r ~ U(+-rate_max)

  void validate() const;
  bool operator==(const ExcitationBands&) const = default;
};

/// `samples` inputs at spacing delta, every one inside U.
std::vector<Input> gen_base_segment(BaseSegmentKind kind, int samples, double delta, Rng& rng,
                                    const ExcitationBands& bands = {});

struct InputTrajectory {
  std::vector<Input> samples;             // total_N + 1 entries
  std::vector<int> segment_boundaries;    // kBaseSegments + 1 indices, last == total_N
  std::vector<BaseSegmentKind> kinds;     // one per segment
  std::uint64_t seed = 0;
};

/// Concatenates 50 base segments over total_N steps. When total_N is not a
/// multiple of 50 the remainder goes to the last segment. The trailing sample
/// at index total_N continues the last segment.
InputTrajectory gen_input_trajectory(int total_N, double delta, std::uint64_t seed,
                                     const ExcitationBands& bands = {});

State sample_initial_condition(Rng& rng, const ExcitationBands& bands = {});

struct NormalizationStats {
  Output mean = Output::Zero();
  Output std = Output::Ones();
};

/// One recorded trajectory: inputs, truth states and measured outputs, all N+1 long.
struct Trajectory {
  std::vector<Input> inputs;
  std::vector<State> states;
  std::vector<Output> outputs;
  std::vector<int> segment_boundaries;
  std::uint64_t seed = 0;

  int steps() const { return static_cast<int>(outputs.size()) - 1; }
};

struct Dataset {
  double delta = 0.01;
  std::uint64_t seed = 0;
  std::vector<int> schedule;
  std::vector<Trajectory> batches;
  NormalizationStats stats;
};

inline const std::vector<int> kDefaultSchedule = {100, 200, 400, 800, 1600};

/// Simulates one trajectory of `steps` steps from a freshly sampled initial
/// condition, driven by an input trajectory from `seed`.
Trajectory simulate_trajectory(const plant::TruthParams& truth, int steps, double delta,
                               std::uint64_t seed, const ExcitationBands& bands = {});

/// Simulates from a given initial condition.
Trajectory simulate_from(const State& x0, const InputTrajectory& inputs,
                         const plant::TruthParams& truth, double delta);

/// Mean and (population) standard deviation per output channel over every sample.
NormalizationStats compute_stats(const std::vector<Trajectory>& trajectories);

Dataset build_dataset(const std::vector<int>& schedule, double delta,
                      const plant::TruthParams& truth, std::uint64_t seed,
                      const ExcitationBands& bands = {});

/// True if theta is strictly inside (-pi/2, pi/2) and the delayed commands are
/// inside their boxes up to `tol`.
bool output_in_admissible_set(const Output& y, double tol = 1e-9);

}  // namespace auvid::excitation
