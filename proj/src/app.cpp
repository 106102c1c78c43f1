#include "auvid/app.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

#include "auvid/checkpoint.hpp"
#include "auvid/dataset_io.hpp"
#include "auvid/evaluate.hpp"
#include "auvid/parallel.hpp"

namespace auvid::app {

namespace fs = std::filesystem;

void AppConfig::apply_preset(const std::string& name) {
  preset = name;
  if (name == "standard") return;
  if (name == "small") {
    train.seeds = 5;
    train.epochs = 80;
    return;
  }
  throw ConfigError("unknown preset '" + name + "' (expected standard or small)");
}

void AppConfig::validate() const {
  truth.validate();
  bands.validate();
  train.validate();
  if (!(delta > 0.0)) throw ConfigError("dataset.delta must be positive");
  if (train.delta != delta) throw ConfigError("train.delta must equal dataset.delta");
  if (eval.test_steps < excitation::kBaseSegments) throw ConfigError("eval.test_steps must be >= 50");
  if (eval.test_inputs < 1) throw ConfigError("eval.test_inputs must be >= 1");
  if (eval.test_initial < 1) throw ConfigError("eval.test_initial must be >= 1");
}

unsigned AppConfig::effective_jobs() const { return jobs == 0 ? default_jobs() : jobs; }

AppConfig AppConfig::load(const std::optional<fs::path>& config_file, const std::string& preset,
                          const std::optional<fs::path>& params_override,
                          const std::optional<std::uint64_t>& seed_override,
                          const std::optional<unsigned>& jobs_override) {
  AppConfig c;
  c.apply_preset(preset);
  if (config_file) {
    if (!fs::exists(*config_file)) throw ConfigError("config file not found: " + config_file->string());
    const auto doc = kv::read_file(*config_file);
    static const std::vector<std::string> known = {"run", "dataset", "excitation", "train", "eval"};
    for (const auto& [section, values] : doc) {
      if (std::find(known.begin(), known.end(), section) == known.end()) {
        throw ConfigError("unknown config section [" + section + "]");
      }
    }
    const fs::path base = config_file->parent_path();
    kv::SectionReader run(doc, "run", false);
    if (run.has("params")) {
      fs::path p = run.get_string("params");
      c.params_path = p.is_absolute() ? p : base / p;
    }
    c.seed = static_cast<std::uint64_t>(run.get_int("seed", static_cast<long long>(c.seed)));
    c.jobs = static_cast<unsigned>(run.get_int("jobs", c.jobs));
    run.finish();

    kv::SectionReader ds(doc, "dataset", false);
    c.train.schedule = ds.get_int_list("schedule", c.train.schedule);
    c.delta = ds.get_double("delta", c.delta);
    ds.finish();

    kv::SectionReader ex(doc, "excitation", false);
    auto& b = c.bands;
    b.freq_min_hz = ex.get_double("freq_min_hz", b.freq_min_hz);
    b.freq_max_hz = ex.get_double("freq_max_hz", b.freq_max_hz);
    b.spline_knots = static_cast<int>(ex.get_int("spline_knots", b.spline_knots));
    b.theta_fraction = ex.get_double("theta_fraction", b.theta_fraction);
    b.u_min = ex.get_double("u_min", b.u_min);
    b.u_max = ex.get_double("u_max", b.u_max);
    b.rate_max = ex.get_double("rate_max", b.rate_max);
    ex.finish();

    // [train] keys override the preset; start from the current values.
    kv::Document train_doc;
    c.train.to_document(train_doc);
    if (auto it = doc.find("train"); it != doc.end()) {
      for (const auto& [k, v] : it->second) {
        if (!train_doc["train"].count(k)) throw ConfigError("unknown config key 'train." + k + "'");
        train_doc["train"][k] = v;
      }
    }
    train_doc["train"]["delta"] = kv::format_double(c.delta);
    c.train = train::TrainConfig::from_document(train_doc);

    kv::SectionReader ev(doc, "eval", false);
    c.eval.test_steps = static_cast<int>(ev.get_int("test_steps", c.eval.test_steps));
    c.eval.test_inputs = static_cast<int>(ev.get_int("test_inputs", c.eval.test_inputs));
    c.eval.test_initial = static_cast<int>(ev.get_int("test_initial", c.eval.test_initial));
    ev.finish();
  }
  c.train.delta = c.delta;
  if (params_override) c.params_path = *params_override;
  if (seed_override) c.seed = *seed_override;
  if (jobs_override) c.jobs = *jobs_override;
  if (!c.params_path) throw ConfigError("no truth parameter file given (use --params or run.params)");
  c.truth = plant::load_truth_params(*c.params_path);
  c.validate();
  return c;
}

kv::Document AppConfig::to_document() const {
  kv::Document doc;
  auto& run = doc["run"];
  run["seed"] = std::to_string(seed);
  run["params"] = params_path ? params_path->string() : "";
  doc["dataset"]["schedule"] = kv::join_ints(train.schedule);
  doc["dataset"]["delta"] = kv::format_double(delta);
  auto& ex = doc["excitation"];
  ex["freq_min_hz"] = kv::format_double(bands.freq_min_hz);
  ex["freq_max_hz"] = kv::format_double(bands.freq_max_hz);
  ex["spline_knots"] = std::to_string(bands.spline_knots);
  ex["theta_fraction"] = kv::format_double(bands.theta_fraction);
  ex["u_min"] = kv::format_double(bands.u_min);
  ex["u_max"] = kv::format_double(bands.u_max);
  ex["rate_max"] = kv::format_double(bands.rate_max);
  train.to_document(doc);
  auto& ev = doc["eval"];
  ev["test_steps"] = std::to_string(eval.test_steps);
  ev["test_inputs"] = std::to_string(eval.test_inputs);
  ev["test_initial"] = std::to_string(eval.test_initial);
  return doc;
}

std::string AppConfig::hash() const {
  auto doc = to_document();
  doc["run"].erase("params");  // the file contents matter, not where it lives
  kv::Document p;
  auto& tp = p["truth_params"];
  const auto mu = truth.mu();
  for (int i = 0; i < 8; ++i) tp[plant::kMuNames[i]] = kv::format_double(mu[i]);
  tp["Z_wabsw"] = kv::format_double(truth.Z_wabsw);
  tp["WB"] = kv::format_double(truth.WB);
  tp["K"] = kv::format_double(truth.K_du) + "," + kv::format_double(truth.K_dq) + "," + kv::format_double(truth.K_dr);
  return kv::hex64(kv::fnv1a(kv::to_string(doc) + kv::to_string(p)));
}

namespace {

/// Runs a command body, mapping exceptions onto exit codes.
template <class Fn>
int guarded(std::ostream& err, const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << stage << ": " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << stage << ": " << e.what() << "\n";
    return kRuntimeFailure;
  }
}

AppConfig load_config(const GlobalArgs& g) {
  return AppConfig::load(g.config, g.preset, g.params, g.seed, g.jobs);
}

void print_dataset_summary(const excitation::Dataset& ds, std::ostream& out) {
  out << "dataset: " << ds.batches.size() << " batches, delta " << ds.delta << " s, seed " << ds.seed << "\n";
  for (std::size_t i = 0; i < ds.batches.size(); ++i) {
    out << "  batch " << i << ": N = " << ds.schedule[i] << " (" << ds.batches[i].outputs.size() << " samples)\n";
  }
  out << "  normalization mean/std:";
  for (int i = 0; i < kOutputDim; ++i) {
    out << " " << io::kOutputNames[i] << "=" << ds.stats.mean[i] << "/" << ds.stats.std[i];
  }
  out << "\n";
}

std::vector<models::Variant> parse_variants(const std::vector<std::string>& names) {
  std::vector<models::Variant> out;
  for (const auto& n : names) {
    if (n == "all") {
      for (const auto& v : models::Variant::all()) out.push_back(v);
    } else {
      out.push_back(models::Variant::parse(n));
    }
  }
  return out;
}

int variant_rank(const models::Variant& v) {
  const auto all = models::Variant::all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] == v) return static_cast<int>(i);
  }
  return static_cast<int>(all.size());
}

int do_train(const AppConfig& cfg, const std::vector<models::Variant>& variants, const excitation::Dataset& ds,
             const fs::path& out_dir, std::ostream& out) {
  const auto runs = train::run_experiment_grid(variants, ds, cfg.train, cfg.truth, cfg.seed, cfg.effective_jobs(),
                                               out_dir);
  int failed = 0;
  for (const auto& r : runs) {
    const double last = r.history.empty() ? 0.0 : r.history.back().loss;
    out << "  " << r.variant.name() << " seed " << r.seed << ": " << r.history.size() << " epochs, final loss "
        << last << ", " << r.wall_seconds << " s";
    if (r.diverged) out << " [diverged: " << r.diverged_at << "]";
    out << "\n";
    if (r.model.n_trainable() == 0) ++failed;
  }
  std::string index = "variant\tseed\tinit_seed\tdiverged\tepochs\tconfig_hash\n";
  for (const auto& r : runs) {
    index += r.variant.name() + "\t" + std::to_string(r.seed) + "\t" + std::to_string(r.init_seed) + "\t" +
             (r.diverged ? "1" : "0") + "\t" + std::to_string(r.history.size()) + "\t" + r.config_hash + "\n";
  }
  io::atomic_write(out_dir / "runs.tsv", index);
  return failed == 0 ? kOk : kRuntimeFailure;
}

eval::TestSet make_test_set(const AppConfig& cfg) {
  return eval::build_test_set(cfg.truth, excitation::derive_seed(cfg.seed, 0x7e57), cfg.eval.test_steps, cfg.delta,
                              cfg.eval.test_inputs, cfg.eval.test_initial, cfg.bands);
}

eval::EvalReport do_eval(const fs::path& runs_dir, const eval::TestSet& test,
                         const excitation::NormalizationStats& stats, unsigned jobs, const fs::path& out_dir) {
  const auto loaded = load_runs(runs_dir);
  if (loaded.empty()) throw ConfigError("no checkpoints found under " + runs_dir.string());
  std::vector<eval::NamedModel> named;
  for (const auto& r : loaded) named.push_back({r.model, r.seed, r.diverged});
  const auto instances = eval::evaluate_all(named, test, stats, jobs);
  auto report = eval::aggregate_report(instances);
  eval::emit_artifacts(report, named, test, stats, out_dir);
  return report;
}

}  // namespace

std::vector<LoadedRun> load_runs(const fs::path& runs_dir) {
  if (!fs::is_directory(runs_dir)) throw ConfigError("runs directory not found: " + runs_dir.string());
  std::vector<LoadedRun> out;
  const std::regex name(R"(seed_(\d+)\.ckpt)");
  for (const auto& vdir : fs::directory_iterator(runs_dir)) {
    if (!vdir.is_directory()) continue;
    for (const auto& f : fs::directory_iterator(vdir.path())) {
      std::smatch m;
      const std::string fname = f.path().filename().string();
      if (!std::regex_match(fname, m, name)) continue;
      const auto c = ckpt::load(f.path());
      out.push_back({f.path(), c.model, c.seed, c.diverged});
    }
  }
  std::sort(out.begin(), out.end(), [](const LoadedRun& a, const LoadedRun& b) {
    const int ra = variant_rank(a.model.variant), rb = variant_rank(b.model.variant);
    if (ra != rb) return ra < rb;
    if (a.model.variant.e_mu != b.model.variant.e_mu) return a.model.variant.e_mu > b.model.variant.e_mu;
    return a.seed < b.seed;
  });
  return out;
}

int cmd_gen_data(const GlobalArgs& g, const GenDataArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, "gen-data", [&] {
    auto cfg = load_config(g);
    if (a.schedule) cfg.train.schedule = *a.schedule;
    if (a.delta) cfg.delta = cfg.train.delta = *a.delta;
    cfg.validate();
    const auto ds = excitation::build_dataset(cfg.train.schedule, cfg.delta, cfg.truth, cfg.seed, cfg.bands);
    io::save_dataset(ds, a.out);
    print_dataset_summary(ds, out);
    out << "meta hash " << kv::hex64(kv::fnv1a([&] {
      std::ifstream in(a.out / "meta");
      std::ostringstream s;
      s << in.rdbuf();
      return s.str();
    }())) << "\n";
    return int(kOk);
  });
}

int cmd_train(const GlobalArgs& g, const TrainArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, "train", [&] {
    auto cfg = load_config(g);
    if (a.seeds) cfg.train.seeds = *a.seeds;
    const auto ds = io::load_dataset(a.dataset);
    cfg.train.schedule = ds.schedule;
    cfg.train.delta = cfg.delta = ds.delta;
    cfg.validate();
    const auto variants = parse_variants({a.variant});
    out << "training " << variants.size() << " variant(s) x " << cfg.train.seeds << " seeds\n";
    return do_train(cfg, variants, ds, a.out, out);
  });
}

int cmd_gen_test(const GlobalArgs& g, const GenTestArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, "gen-test", [&] {
    const auto cfg = load_config(g);
    const auto test = make_test_set(cfg);
    eval::save_test_set(test, a.out);
    out << "test set: " << test.trajectories.size() << " trajectories of " << test.steps + 1 << " samples\n";
    return int(kOk);
  });
}

int cmd_eval(const GlobalArgs& g, const EvalArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, "eval", [&] {
    eval::TestSet test;
    unsigned jobs = g.jobs ? *g.jobs : 0;
    if (fs::exists(a.test / "meta")) {
      test = eval::load_test_set(a.test);
    } else {
      const auto cfg = load_config(g);
      jobs = cfg.jobs;
      test = make_test_set(cfg);
      eval::save_test_set(test, a.test);
    }
    const auto stats = io::load_dataset_stats(a.dataset);
    const auto report = do_eval(a.runs, test, stats, jobs == 0 ? default_jobs() : jobs, a.out);
    out << eval::summary_text(report);
    return int(kOk);
  });
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, "report", [&] {
    if (a.format != "csv" && a.format != "txt") throw ConfigError("--format must be csv or txt");
    const fs::path file = a.eval / (a.format == "csv" ? "summary.csv" : "summary.txt");
    std::ifstream in(file);
    if (!in) throw ConfigError("no evaluation summary at " + file.string());
    out << in.rdbuf();
    return int(kOk);
  });
}

int cmd_full_experiment(const GlobalArgs& g, const FullArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path root = a.out;
  AppConfig cfg;
  std::vector<models::Variant> variants;
  if (int rc = guarded(err, "config", [&] {
        cfg = load_config(g);
        variants = parse_variants(a.variants ? *a.variants : std::vector<std::string>{"all"});
        return int(kOk);
      });
      rc != kOk) {
    return rc;
  }
  fs::create_directories(root);
  const std::string hash = cfg.hash();
  std::string variant_key;
  for (const auto& v : variants) variant_key += (variant_key.empty() ? "" : ",") + v.name();

  kv::Document manifest;
  if (fs::exists(root / "manifest")) {
    manifest = kv::read_file(root / "manifest");
    if (manifest["manifest"]["config_hash"] != hash) {
      out << "config changed since the last run; starting over\n";
      manifest.clear();
    }
  }
  auto& m = manifest["manifest"];
  m["version"] = kVersion;
  m["config_hash"] = hash;
  m["preset"] = cfg.preset;
  auto write_manifest = [&] { io::atomic_write(root / "manifest", kv::to_string(manifest)); };
  auto done = [&](const std::string& stage, const std::string& value = "done") {
    return m.count("stage_" + stage) && m["stage_" + stage] == value;
  };
  io::atomic_write(root / "config.ini", kv::to_string(cfg.to_document()));
  plant::save_truth_params(cfg.truth, root / "truth_params.ini");
  write_manifest();

  const fs::path data_dir = root / "dataset" / "train";
  const fs::path runs_dir = root / "runs";
  const fs::path test_dir = root / "test";
  const fs::path eval_dir = root / "eval";

  excitation::Dataset ds;
  if (int rc = guarded(err, "gen-data", [&] {
        if (done("data") && fs::exists(data_dir / "meta")) {
          out << "[gen-data] skipped (complete)\n";
          ds = io::load_dataset(data_dir);
        } else {
          out << "[gen-data]\n";
          ds = excitation::build_dataset(cfg.train.schedule, cfg.delta, cfg.truth, cfg.seed, cfg.bands);
          io::save_dataset(ds, data_dir);
          print_dataset_summary(ds, out);
          m["stage_data"] = "done";
          m["data_hash"] = io::directory_hash(data_dir);
          write_manifest();
        }
        return int(kOk);
      });
      rc != kOk) {
    return rc;
  }

  if (int rc = guarded(err, "train", [&] {
        if (done("train", variant_key) && fs::exists(runs_dir / "runs.tsv")) {
          out << "[train] skipped (complete)\n";
          return int(kOk);
        }
        out << "[train] " << variants.size() << " variants x " << cfg.train.seeds << " seeds\n";
        if (fs::exists(runs_dir)) fs::remove_all(runs_dir);
        const int status = do_train(cfg, variants, ds, runs_dir, out);
        if (status != kOk) throw std::runtime_error("one or more training runs failed");
        m["stage_train"] = variant_key;
        m.erase("stage_eval");
        m.erase("stage_report");
        write_manifest();
        return int(kOk);
      });
      rc != kOk) {
    return rc;
  }

  eval::TestSet test;
  if (int rc = guarded(err, "test", [&] {
        if (done("test") && fs::exists(test_dir / "meta")) {
          out << "[test] skipped (complete)\n";
          test = eval::load_test_set(test_dir);
        } else {
          out << "[test]\n";
          test = make_test_set(cfg);
          eval::save_test_set(test, test_dir);
          m["stage_test"] = "done";
          write_manifest();
        }
        return int(kOk);
      });
      rc != kOk) {
    return rc;
  }

  if (int rc = guarded(err, "eval", [&] {
        if (done("eval") && fs::exists(eval_dir / "summary.csv")) {
          out << "[eval] skipped (complete)\n";
          return int(kOk);
        }
        out << "[eval]\n";
        do_eval(runs_dir, test, ds.stats, cfg.effective_jobs(), eval_dir);
        m["stage_eval"] = "done";
        write_manifest();
        return int(kOk);
      });
      rc != kOk) {
    return rc;
  }

  const int rc = cmd_report({eval_dir, "txt"}, out, err);
  if (rc == kOk) {
    m["stage_report"] = "done";
    write_manifest();
  }
  return rc;
}

}  // namespace auvid::app
