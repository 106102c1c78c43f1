#include "auvid/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "auvid/bptt.hpp"
#include "auvid/constraints.hpp"
#include "auvid/dataset_io.hpp"
#include "auvid/kvconfig.hpp"
#include "auvid/parallel.hpp"

namespace auvid::eval {

namespace fs = std::filesystem;

TestSet build_test_set(const plant::TruthParams& truth, std::uint64_t seed, int steps, double delta, int n_inputs,
                       int n_initial, const excitation::ExcitationBands& bands) {
  TestSet t;
  t.delta = delta;
  t.steps = steps;
  t.n_inputs = n_inputs;
  t.n_initial = n_initial;
  t.seed = seed;
  std::vector<State> ics;
  for (int j = 0; j < n_initial; ++j) {
    auto rng = excitation::derive_rng(seed, 1000 + j);
    ics.push_back(excitation::sample_initial_condition(rng, bands));
  }
  for (int i = 0; i < n_inputs; ++i) {
    const auto inputs = excitation::gen_input_trajectory(steps, delta, excitation::derive_seed(seed, i), bands);
    for (int j = 0; j < n_initial; ++j) {
      try {
        t.trajectories.push_back(excitation::simulate_from(ics[j], inputs, truth, delta));
      } catch (const SingularityError& e) {
        throw SingularityError("test trajectory " + std::to_string(i * n_initial + j) + ": " + e.what());
      }
    }
  }
  return t;
}

void save_test_set(const TestSet& t, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < t.trajectories.size(); ++i) {
    io::write_trajectory_csv(dir / ("traj_" + std::to_string(i) + ".csv"), t.trajectories[i], t.delta);
  }
  kv::Document doc;
  auto& s = doc["test_set"];
  s["format_version"] = "1";
  s["seed"] = std::to_string(t.seed);
  s["delta"] = kv::format_double(t.delta);
  s["steps"] = std::to_string(t.steps);
  s["n_inputs"] = std::to_string(t.n_inputs);
  s["n_initial"] = std::to_string(t.n_initial);
  io::atomic_write(dir / "meta", kv::to_string(doc));
}

TestSet load_test_set(const fs::path& dir) {
  if (!fs::exists(dir / "meta")) throw ConfigError("test set meta not found: " + (dir / "meta").string());
  const auto doc = kv::read_file(dir / "meta");
  kv::SectionReader s(doc, "test_set");
  if (s.get_int("format_version") != 1) throw ConfigError("unsupported test set format_version");
  TestSet t;
  t.seed = std::stoull(s.get_string("seed"));
  t.delta = s.get_double("delta");
  t.steps = static_cast<int>(s.get_int("steps"));
  t.n_inputs = static_cast<int>(s.get_int("n_inputs"));
  t.n_initial = static_cast<int>(s.get_int("n_initial"));
  s.finish();
  for (int i = 0; i < t.n_inputs * t.n_initial; ++i) {
    auto traj = io::read_trajectory_csv(dir / ("traj_" + std::to_string(i) + ".csv"));
    if (traj.steps() != t.steps) throw ConfigError("test trajectory " + std::to_string(i) + " has the wrong length");
    t.trajectories.push_back(std::move(traj));
  }
  return t;
}

Rollout rollout_model(const models::TrainableModel& m, const Output& z0, const std::vector<Input>& inputs,
                      double delta, int steps) {
  Rollout r;
  r.z.reserve(steps + 1);
  if (!z0.allFinite()) throw std::invalid_argument("rollout_model: non-finite initial output");
  r.z.push_back(z0);
  Output z = z0;
  for (int k = 0; k < steps; ++k) {
    try {
      z = z + delta * m.rhs(z, inputs[k]);
    } catch (const SingularityError&) {
      r.diverged = true;
      break;
    }
    if (!z.allFinite() || z.cwiseAbs().maxCoeff() > nn::kDivergenceBound) {
      r.diverged = true;
      break;
    }
    r.z.push_back(z);
  }
  return r;
}

double normalized_mse(const std::vector<Output>& z, const std::vector<Output>& y,
                      const excitation::NormalizationStats& stats) {
  if (z.size() > y.size()) throw std::invalid_argument("normalized_mse: prediction longer than truth");
  if (z.empty()) throw std::invalid_argument("normalized_mse: empty trajectory");
  const Output inv = stats.std.cwiseInverse();
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    sum += nn::output_residual(y[k], z[k]).cwiseProduct(inv).squaredNorm();
  }
  return sum / static_cast<double>(z.size());
}

double mean_boundary_penalty(const std::vector<Output>& z) {
  static const auto spec = models::ConstraintSpec::defaults();
  double sum = 0.0;
  for (const auto& v : z) sum += models::constraint_penalty(models::constraint_violation(v, spec));
  return z.empty() ? 0.0 : sum / static_cast<double>(z.size());
}

InstanceResult evaluate_instance(const NamedModel& m, const TestSet& test,
                                 const excitation::NormalizationStats& stats) {
  InstanceResult res;
  res.variant = m.model.variant;
  res.seed = m.seed;
  res.diverged = m.train_diverged;
  for (const auto& traj : test.trajectories) {
    const auto r = rollout_model(m.model, traj.outputs.front(), traj.inputs, test.delta, traj.steps());
    res.diverged = res.diverged || r.diverged;
    res.mse.push_back(normalized_mse(r.z, traj.outputs, stats));
    res.penalty.push_back(mean_boundary_penalty(r.z));
  }
  const double n = static_cast<double>(res.mse.size());
  res.mean_mse = std::accumulate(res.mse.begin(), res.mse.end(), 0.0) / n;
  res.mean_penalty = std::accumulate(res.penalty.begin(), res.penalty.end(), 0.0) / n;
  return res;
}

std::vector<InstanceResult> evaluate_all(const std::vector<NamedModel>& models, const TestSet& test,
                                         const excitation::NormalizationStats& stats, unsigned jobs) {
  std::vector<InstanceResult> out(models.size());
  parallel_for(models.size(), jobs, [&](std::size_t i) { out[i] = evaluate_instance(models[i], test, stats); });
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty set");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EvalReport aggregate_report(const std::vector<InstanceResult>& instances) {
  EvalReport report;
  report.instances = instances;
  std::vector<std::string> order;
  std::map<std::string, std::vector<const InstanceResult*>> groups;
  for (const auto& r : instances) {
    const auto key = r.variant.name();
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : order) {
    const auto& members = groups[key];
    VariantSummary s;
    s.variant = members.front()->variant;
    std::vector<const InstanceResult*> pool;
    double pen_sum = 0.0;
    for (const auto* r : members) {
      s.seeds.push_back(r->seed);
      s.instance_means.push_back(r->mean_mse);
      if (r->diverged) {
        s.diverged.push_back(r->seed);
      } else {
        pool.push_back(r);
        pen_sum += r->mean_penalty;
      }
    }
    if (!pool.empty()) {
      s.mean_penalty = pen_sum / static_cast<double>(pool.size());
      std::vector<double> means;
      for (const auto* r : pool) means.push_back(r->mean_mse);
      const double q1 = quantile(means, 0.25);
      const double q3 = quantile(means, 0.75);
      const double iqr = q3 - q1;
      s.fence_low = q1 - 1.5 * iqr;
      s.fence_high = q3 + 1.5 * iqr;
      std::vector<double> kept;
      double best = std::numeric_limits<double>::infinity();
      for (const auto* r : pool) {
        if (r->mean_mse < s.fence_low || r->mean_mse > s.fence_high) continue;
        s.retained.push_back(r->seed);
        kept.push_back(r->mean_mse);
        if (r->mean_mse < best) {
          best = r->mean_mse;
          s.best_seed = r->seed;
        }
      }
      const double n = static_cast<double>(kept.size());
      s.mean = std::accumulate(kept.begin(), kept.end(), 0.0) / n;
      double ss = 0.0;
      for (double v : kept) ss += (v - s.mean) * (v - s.mean);
      s.std = kept.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    } else {
      s.mean = std::numeric_limits<double>::quiet_NaN();
      s.std = std::numeric_limits<double>::quiet_NaN();
    }
    report.variants.push_back(std::move(s));
  }
  return report;
}

const VariantSummary* EvalReport::find(const models::Variant& v) const {
  for (const auto& s : variants) {
    if (s.variant.name() == v.name()) return &s;
  }
  return nullptr;
}

std::string summary_csv(const EvalReport& report) {
  std::string out = "variant,mean_mse,std_mse,retained,diverged,best_seed\n";
  char buf[256];
  for (const auto& s : report.variants) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%zu,%zu,%d\n", s.variant.name().c_str(), s.mean, s.std,
                  s.retained.size(), s.diverged.size(), s.best_seed);
    out += buf;
  }
  return out;
}

std::string summary_text(const EvalReport& report) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s %16s %16s %9s %9s %10s\n", "model", "mean MSE", "std", "retained",
                "diverged", "best seed");
  out << buf;
  for (const auto& s : report.variants) {
    std::snprintf(buf, sizeof buf, "%-14s %16.6f %16.6f %9zu %9zu %10d\n", s.variant.name().c_str(), s.mean, s.std,
                  s.retained.size(), s.diverged.size(), s.best_seed);
    out << buf;
  }
  return out.str();
}

namespace {

const NamedModel* find_model(const std::vector<NamedModel>& models, const models::Variant& v, int seed) {
  for (const auto& m : models) {
    if (m.seed == seed && m.model.variant.name() == v.name()) return &m;
  }
  return nullptr;
}

}  // namespace

void emit_artifacts(const EvalReport& report, const std::vector<NamedModel>& models, const TestSet& test,
                    const excitation::NormalizationStats& stats, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  io::atomic_write(out_dir / "summary.csv", summary_csv(report));
  io::atomic_write(out_dir / "summary.txt", summary_text(report));

  {
    std::string mse = "variant,seed,trajectory,mse,boundary_penalty,diverged\n";
    char buf[256];
    for (const auto& r : report.instances) {
      for (std::size_t t = 0; t < r.mse.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%s,%d,%zu,%.10g,%.10g,%d\n", r.variant.name().c_str(), r.seed, t, r.mse[t],
                      r.penalty[t], r.diverged ? 1 : 0);
        mse += buf;
      }
    }
    io::atomic_write(out_dir / "mse.csv", mse);
  }

  // Rollouts of the best instance of every variant over the whole test set.
  struct Best {
    std::string slug;
    std::string name;
    std::vector<Rollout> rollouts;
  };
  std::vector<Best> bests;
  for (const auto& s : report.variants) {
    const NamedModel* m = s.best_seed >= 0 ? find_model(models, s.variant, s.best_seed) : nullptr;
    if (!m) continue;
    Best b{s.variant.slug(), s.variant.name(), {}};
    for (const auto& traj : test.trajectories) {
      b.rollouts.push_back(rollout_model(m->model, traj.outputs.front(), traj.inputs, test.delta, traj.steps()));
    }
    bests.push_back(std::move(b));
  }

  const int rows = test.steps + 1;
  char buf[64];
  for (int channel : {static_cast<int>(ox::theta), static_cast<int>(ox::u)}) {
    std::string csv = "t";
    for (const auto& b : bests) csv += "," + b.name + "_mean," + b.name + "_std";
    csv += "\n";
    for (int k = 0; k < rows; ++k) {
      std::snprintf(buf, sizeof buf, "%.6f", k * test.delta);
      csv += buf;
      for (const auto& b : bests) {
        double sum = 0.0, sq = 0.0;
        int n = 0;
        for (std::size_t t = 0; t < test.trajectories.size(); ++t) {
          const auto& z = b.rollouts[t].z;
          if (static_cast<std::size_t>(k) >= z.size()) continue;
          const double e = nn::output_residual(test.trajectories[t].outputs[k], z[k])[channel] / stats.std[channel];
          sum += e * e;
          sq += e * e * e * e;
          ++n;
        }
        const double mean = n ? sum / n : std::nan("");
        const double var = n ? std::max(0.0, sq / n - mean * mean) : std::nan("");
        std::snprintf(buf, sizeof buf, ",%.8g,%.8g", mean, std::sqrt(var));
        csv += buf;
      }
      csv += "\n";
    }
    io::atomic_write(out_dir / (std::string("residual_") + io::kOutputNames[channel] + ".csv"), csv);
  }

  for (const auto& b : bests) {
    if (test.trajectories.empty()) break;
    const auto& truth = test.trajectories.front().outputs;
    const auto& z = b.rollouts.front().z;
    std::string csv = "t";
    for (const char* n : io::kOutputNames) csv += std::string(",true_") + n;
    for (const char* n : io::kOutputNames) csv += std::string(",pred_") + n;
    csv += "\n";
    for (int k = 0; k < rows; ++k) {
      std::snprintf(buf, sizeof buf, "%.6f", k * test.delta);
      csv += buf;
      for (int i = 0; i < kOutputDim; ++i) {
        std::snprintf(buf, sizeof buf, ",%.8g", truth[k][i]);
        csv += buf;
      }
      for (int i = 0; i < kOutputDim; ++i) {
        std::snprintf(buf, sizeof buf, ",%.8g", static_cast<std::size_t>(k) < z.size() ? z[k][i] : std::nan(""));
        csv += buf;
      }
      csv += "\n";
    }
    io::atomic_write(out_dir / ("overlay_" + b.slug + ".csv"), csv);
  }

  std::string gp =
      "# gnuplot script: residual MSE of theta with a one-std band per model type\n"
      "set datafile separator ','\n"
      "set key autotitle columnhead\n"
      "set xlabel 't [s]'\n"
      "set ylabel 'normalized squared residual'\n"
      "set logscale y\n"
      "plot ";
  for (std::size_t i = 0; i < bests.size(); ++i) {
    const int col = 2 + 2 * static_cast<int>(i);
    if (i) gp += ", \\\n     ";
    gp += "'residual_theta.csv' using 1:" + std::to_string(col) + " with lines title '" + bests[i].name + "'";
  }
  gp += "\n";
  io::atomic_write(out_dir / "plot.gp", gp);
}

}  // namespace auvid::eval
