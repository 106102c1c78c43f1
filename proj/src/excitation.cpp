#include "auvid/excitation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace auvid::excitation {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x41555644u};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

Rng derive_rng(std::uint64_t master, std::uint64_t stream) {
  return Rng(derive_seed(master, stream));
}

void ExcitationBands::validate() const {
  if (!(freq_min_hz > 0.0 && freq_min_hz <= freq_max_hz)) {
    throw ConfigError("excitation: need 0 < freq_min_hz <= freq_max_hz");
  }
  if (spline_knots < 2) throw ConfigError("excitation.spline_knots must be >= 2");
  if (!(theta_fraction > 0.0 && theta_fraction < 1.0)) {
    throw ConfigError("excitation.theta_fraction must be in (0, 1)");
  }
  if (!(u_min <= u_max)) throw ConfigError("excitation: need u_min <= u_max");
  if (!(rate_max >= 0.0)) throw ConfigError("excitation.rate_max must be >= 0");
}

namespace {

double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Lagrange interpolation through equally spaced knots on [0, duration].
double lagrange(const std::vector<double>& knots, double duration, double t) {
  const int n = static_cast<int>(knots.size());
  const double h = duration / (n - 1);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double basis = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) basis *= (t - j * h) / ((i - j) * h);
    }
    sum += knots[i] * basis;
  }
  return sum;
}

}  // namespace

std::vector<Input> gen_base_segment(BaseSegmentKind kind, int samples, double delta, Rng& rng,
                                    const ExcitationBands& bands) {
  if (samples < 1) throw std::invalid_argument("gen_base_segment: duration shorter than delta");
  std::vector<Input> out(samples, Input::Zero());
  const double duration = samples * delta;
  for (int ch = 0; ch < kInputDim; ++ch) {
    const double lo = kInputLower[ch];
    const double hi = kInputUpper[ch];
    auto set = [&](int k, double v) { out[k][ch] = std::clamp(v, lo, hi); };
    switch (kind) {
      case BaseSegmentKind::Step: {
        const double level = uniform(rng, lo, hi);
        for (int k = 0; k < samples; ++k) set(k, level);
        break;
      }
      case BaseSegmentKind::Periodic: {
        const double amplitude = uniform(rng, 0.0, 0.5 * (hi - lo));
        const double freq = uniform(rng, bands.freq_min_hz, bands.freq_max_hz);
        const double phase = uniform(rng, 0.0, 2.0 * kPi);
        const double offset = uniform(rng, lo, hi);
        for (int k = 0; k < samples; ++k) {
          set(k, offset + amplitude * std::sin(2.0 * kPi * freq * k * delta + phase));
        }
        break;
      }
      case BaseSegmentKind::Spline: {
        std::vector<double> knots(bands.spline_knots);
        for (auto& v : knots) v = uniform(rng, lo, hi);
        for (int k = 0; k < samples; ++k) set(k, lagrange(knots, duration, k * delta));
        break;
      }
    }
  }
  return out;
}

InputTrajectory gen_input_trajectory(int total_N, double delta, std::uint64_t seed,
                                     const ExcitationBands& bands) {
  if (total_N < kBaseSegments) {
    throw std::invalid_argument("gen_input_trajectory: need at least one step per base segment");
  }
  Rng rng(seed);
  InputTrajectory traj;
  traj.seed = seed;
  traj.samples.reserve(total_N + 1);
  const int per = total_N / kBaseSegments;
  std::uniform_int_distribution<int> pick(0, 2);
  for (int s = 0; s < kBaseSegments; ++s) {
    const int start = s * per;
    const bool last = s == kBaseSegments - 1;
    const int len = last ? total_N - start : per;
    const auto kind = static_cast<BaseSegmentKind>(pick(rng));
    traj.segment_boundaries.push_back(start);
    traj.kinds.push_back(kind);
    // The last segment also covers the terminal sample at index total_N.
    auto seg = gen_base_segment(kind, last ? len + 1 : len, delta, rng, bands);
    traj.samples.insert(traj.samples.end(), seg.begin(), seg.end());
  }
  traj.segment_boundaries.push_back(total_N);
  return traj;
}

State sample_initial_condition(Rng& rng, const ExcitationBands& bands) {
  State x = State::Zero();
  const double th = bands.theta_fraction * kPi / 2.0;
  x[sx::theta] = uniform(rng, -th, th);
  x[sx::psi] = wrap_angle(uniform(rng, -kPi, kPi));
  x[sx::u] = uniform(rng, bands.u_min, bands.u_max);
  x[sx::q] = uniform(rng, -bands.rate_max, bands.rate_max);
  x[sx::r] = uniform(rng, -bands.rate_max, bands.rate_max);
  x[sx::duc] = uniform(rng, kInputLower[0], kInputUpper[0]);
  x[sx::dqc] = uniform(rng, kInputLower[1], kInputUpper[1]);
  x[sx::drc] = uniform(rng, kInputLower[2], kInputUpper[2]);
  return x;
}

Trajectory simulate_from(const State& x0, const InputTrajectory& inputs,
                         const plant::TruthParams& truth, double delta) {
  const int steps = static_cast<int>(inputs.samples.size()) - 1;
  Trajectory t;
  t.inputs = inputs.samples;
  t.segment_boundaries = inputs.segment_boundaries;
  t.seed = inputs.seed;
  t.states = plant::integrate_truth(x0, inputs.samples, truth, delta, steps);
  t.outputs.reserve(t.states.size());
  for (const auto& x : t.states) t.outputs.push_back(plant::output_map(x));
  return t;
}

Trajectory simulate_trajectory(const plant::TruthParams& truth, int steps, double delta,
                               std::uint64_t seed, const ExcitationBands& bands) {
  Rng ic_rng = derive_rng(seed, 0);
  const State x0 = sample_initial_condition(ic_rng, bands);
  const auto inputs = gen_input_trajectory(steps, delta, derive_seed(seed, 1), bands);
  auto t = simulate_from(x0, inputs, truth, delta);
  t.seed = seed;
  return t;
}

NormalizationStats compute_stats(const std::vector<Trajectory>& trajectories) {
  Output sum = Output::Zero();
  std::size_t n = 0;
  for (const auto& t : trajectories) {
    for (const auto& y : t.outputs) sum += y;
    n += t.outputs.size();
  }
  if (n == 0) throw ConfigError("cannot compute normalization statistics of an empty dataset");
  NormalizationStats stats;
  stats.mean = sum / static_cast<double>(n);
  Output sq = Output::Zero();
  for (const auto& t : trajectories) {
    for (const auto& y : t.outputs) sq += (y - stats.mean).cwiseAbs2();
  }
  stats.std = (sq / static_cast<double>(n)).cwiseSqrt();
  for (int i = 0; i < kOutputDim; ++i) {
    if (!(stats.std[i] > 0.0)) {
      throw ConfigError("normalization: output channel " + std::to_string(i) +
                        " has zero standard deviation");
    }
  }
  return stats;
}

Dataset build_dataset(const std::vector<int>& schedule, double delta,
                      const plant::TruthParams& truth, std::uint64_t seed,
                      const ExcitationBands& bands) {
  if (schedule.empty()) throw ConfigError("dataset schedule is empty");
  if (!(delta > 0.0)) throw ConfigError("dataset delta must be positive");
  Dataset ds;
  ds.delta = delta;
  ds.seed = seed;
  ds.schedule = schedule;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    try {
      ds.batches.push_back(simulate_trajectory(truth, schedule[i], delta, derive_seed(seed, i), bands));
    } catch (const SingularityError& e) {
      throw SingularityError("batch " + std::to_string(i) + ": " + e.what());
    }
  }
  ds.stats = compute_stats(ds.batches);
  return ds;
}

bool output_in_admissible_set(const Output& y, double tol) {
  if (!(std::abs(y[ox::theta]) < kPi / 2.0)) return false;
  for (int i = 0; i < kInputDim; ++i) {
    const double v = y[ox::duc + i];
    if (!(v >= kInputLower[i] - tol && v <= kInputUpper[i] + tol)) return false;
  }
  return y.allFinite();
}

}  // namespace auvid::excitation
