#include "auvid/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "auvid/bptt.hpp"
#include "auvid/checkpoint.hpp"
#include "auvid/dataset_io.hpp"
#include "auvid/parallel.hpp"

namespace auvid::train {

void TrainConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ConfigError("train." + key + " " + what);
  };
  if (schedule.empty()) fail("schedule", "must not be empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < excitation::kBaseSegments) fail("schedule", "entries must be >= 50 steps");
    if (i > 0 && schedule[i] != 2 * schedule[i - 1]) fail("schedule", "must double from batch to batch");
  }
  if (epochs < 0) fail("epochs", "must be >= 0");
  if (patience < 1) fail("patience", "must be >= 1");
  if (graybox_epochs < 0) fail("graybox_epochs", "must be >= 0");
  if (graybox_patience < 1) fail("graybox_patience", "must be >= 1");
  if (!(lr > 0.0)) fail("lr", "must be positive");
  if (!(lr_graybox > 0.0)) fail("lr_graybox", "must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1", "must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2", "must be in [0, 1)");
  if (!(eps > 0.0)) fail("eps", "must be positive");
  if (!(weight_decay >= 0.0)) fail("weight_decay", "must be >= 0");
  if (!(weight_decay_graybox >= 0.0)) fail("weight_decay_graybox", "must be >= 0");
  if (!(clip_norm > 0.0)) fail("clip_norm", "must be positive");
  if (seeds < 1) fail("seeds", "must be >= 1");
  if (!(delta > 0.0)) fail("delta", "must be positive");
  if (!model.blackbox_bounds.valid()) fail("blackbox_sigma_min/max", "must satisfy 0 <= min <= max");
  if (!model.hybrid_bounds.valid()) fail("hybrid_sigma_min/max", "must satisfy 0 <= min <= max");
  if (!(model.penalty_weight >= 0.0)) fail("penalty_weight", "must be >= 0");
}

void TrainConfig::to_document(kv::Document& doc) const {
  auto& s = doc["train"];
  auto d = kv::format_double;
  s["schedule"] = kv::join_ints(schedule);
  s["epochs"] = std::to_string(epochs);
  s["patience"] = std::to_string(patience);
  s["graybox_epochs"] = std::to_string(graybox_epochs);
  s["graybox_patience"] = std::to_string(graybox_patience);
  s["lr"] = d(lr);
  s["lr_graybox"] = d(lr_graybox);
  s["beta1"] = d(beta1);
  s["beta2"] = d(beta2);
  s["eps"] = d(eps);
  s["weight_decay"] = d(weight_decay);
  s["weight_decay_graybox"] = d(weight_decay_graybox);
  s["clip_norm"] = d(clip_norm);
  s["halve_lr_per_batch"] = halve_lr_per_batch ? "1" : "0";
  s["seeds"] = std::to_string(seeds);
  s["delta"] = d(delta);
  s["hidden_layers"] = std::to_string(model.mlp_dims.size() - 2);
  s["hidden_width"] = std::to_string(model.mlp_dims.size() > 2 ? model.mlp_dims[1] : 0);
  s["blackbox_sigma_min"] = d(model.blackbox_bounds.sigma_min);
  s["blackbox_sigma_max"] = d(model.blackbox_bounds.sigma_max);
  s["hybrid_sigma_min"] = d(model.hybrid_bounds.sigma_min);
  s["hybrid_sigma_max"] = d(model.hybrid_bounds.sigma_max);
  s["penalty_weight"] = d(model.penalty_weight);
  s["graybox_init_e_mu"] = d(model.graybox_init_e_mu);
}

TrainConfig TrainConfig::from_document(const kv::Document& doc) {
  TrainConfig c;
  kv::SectionReader s(doc, "train", /*required=*/false);
  c.schedule = s.get_int_list("schedule", c.schedule);
  c.epochs = static_cast<int>(s.get_int("epochs", c.epochs));
  c.patience = static_cast<int>(s.get_int("patience", c.patience));
  c.graybox_epochs = static_cast<int>(s.get_int("graybox_epochs", c.graybox_epochs));
  c.graybox_patience = static_cast<int>(s.get_int("graybox_patience", c.graybox_patience));
  c.lr = s.get_double("lr", c.lr);
  c.lr_graybox = s.get_double("lr_graybox", c.lr_graybox);
  c.beta1 = s.get_double("beta1", c.beta1);
  c.beta2 = s.get_double("beta2", c.beta2);
  c.eps = s.get_double("eps", c.eps);
  c.weight_decay = s.get_double("weight_decay", c.weight_decay);
  c.weight_decay_graybox = s.get_double("weight_decay_graybox", c.weight_decay_graybox);
  c.clip_norm = s.get_double("clip_norm", c.clip_norm);
  c.halve_lr_per_batch = s.get_int("halve_lr_per_batch", c.halve_lr_per_batch ? 1 : 0) != 0;
  c.seeds = static_cast<int>(s.get_int("seeds", c.seeds));
  c.delta = s.get_double("delta", c.delta);
  const long long layers = s.get_int("hidden_layers", 4);
  const long long width = s.get_int("hidden_width", 128);
  if (layers < 1 || width < 1) throw ConfigError("train.hidden_layers/hidden_width must be >= 1");
  c.model.mlp_dims = {kOutputDim + kInputDim};
  for (long long i = 0; i < layers; ++i) c.model.mlp_dims.push_back(static_cast<int>(width));
  c.model.mlp_dims.push_back(kOutputDim);
  c.model.blackbox_bounds.sigma_min = s.get_double("blackbox_sigma_min", c.model.blackbox_bounds.sigma_min);
  c.model.blackbox_bounds.sigma_max = s.get_double("blackbox_sigma_max", c.model.blackbox_bounds.sigma_max);
  c.model.hybrid_bounds.sigma_min = s.get_double("hybrid_sigma_min", c.model.hybrid_bounds.sigma_min);
  c.model.hybrid_bounds.sigma_max = s.get_double("hybrid_sigma_max", c.model.hybrid_bounds.sigma_max);
  c.model.penalty_weight = s.get_double("penalty_weight", c.model.penalty_weight);
  c.model.graybox_init_e_mu = s.get_double("graybox_init_e_mu", c.model.graybox_init_e_mu);
  s.finish();
  c.validate();
  return c;
}

std::string TrainConfig::hash() const {
  kv::Document doc;
  to_document(doc);
  return kv::hex64(kv::fnv1a(kv::to_string(doc)));
}

std::uint64_t run_seed(std::uint64_t master, const models::Variant& v, int seed_index) {
  return excitation::derive_seed(excitation::derive_seed(master, kv::fnv1a(v.name())),
                                 static_cast<std::uint64_t>(seed_index));
}

TrainRun train_model(const models::Variant& variant, const excitation::Dataset& ds, const TrainConfig& cfg,
                     const plant::TruthParams& truth, std::uint64_t init_seed, const StepHook& hook) {
  cfg.validate();
  if (ds.schedule != cfg.schedule) throw ConfigError("dataset schedule does not match train.schedule");
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  TrainRun run;
  run.variant = variant;
  run.init_seed = init_seed;
  run.config_hash = cfg.hash();
  excitation::Rng rng(init_seed);
  run.model = models::TrainableModel::make(variant, truth, rng, cfg.model);
  run.initial = run.model;

  const bool graybox = variant.kind == models::ModelKind::Graybox;
  nn::AdamWConfig opt;
  opt.lr = graybox ? cfg.lr_graybox : cfg.lr;
  opt.beta1 = cfg.beta1;
  opt.beta2 = cfg.beta2;
  opt.eps = cfg.eps;
  opt.weight_decay = graybox ? cfg.weight_decay_graybox : cfg.weight_decay;
  run.optimizer = nn::AdamWState(run.model.n_trainable(), opt);
  const double base_lr = opt.lr;
  const int epochs = graybox ? cfg.graybox_epochs : cfg.epochs;
  const int patience = graybox ? cfg.graybox_patience : cfg.patience;
  auto& model = run.model;
  const models::ConstraintSpec* constraint = model.constraint ? &*model.constraint : nullptr;

  for (std::size_t b = 0; b < ds.batches.size() && !run.diverged; ++b) {
    const auto& traj = ds.batches[b];
    run.optimizer.cfg.lr = cfg.halve_lr_per_batch ? base_lr / std::pow(2.0, static_cast<double>(b)) : base_lr;
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_params = model.trainable_params();
    int since_best = 0;
    for (int e = 0; e < epochs; ++e) {
      const auto t0 = clock::now();
      nn::BpttResult res;
      try {
        res = nn::bptt_trajectory_grad(model, traj.outputs.front(), traj.inputs, traj.outputs, ds.delta, constraint);
      } catch (const std::runtime_error& err) {
        // DivergenceError or SingularityError: the run stops with its best finite parameters.
        run.diverged = true;
        run.diverged_at = "batch " + std::to_string(b) + " epoch " + std::to_string(e) + ": " + err.what();
        break;
      }
      const double gnorm = nn::clip_global_norm(res.grad, cfg.clip_norm);
      if (res.loss < best) {
        best = res.loss;
        best_params = model.trainable_params();
        since_best = 0;
      } else if (++since_best >= patience) {
        run.history.push_back({static_cast<int>(b), e, res.loss, res.penalty, gnorm,
                               std::chrono::duration<double, std::milli>(clock::now() - t0).count()});
        break;
      }
      Eigen::VectorXd p = model.trainable_params();
      nn::adamw_step(p, res.grad, run.optimizer);
      model.set_trainable_params(p);
      model.project();
      if (hook) hook(model, static_cast<int>(b), e);
      run.history.push_back({static_cast<int>(b), e, res.loss, res.penalty, gnorm,
                             std::chrono::duration<double, std::milli>(clock::now() - t0).count()});
    }
    if (std::isfinite(best)) model.set_trainable_params(best_params);
  }
  run.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return run;
}

std::string format_log(const std::vector<EpochLog>& history) {
  std::string out = "batch\tepoch\tloss\tpenalty\tgrad_norm\twall_ms\n";
  char buf[160];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%d\t%d\t%.10g\t%.10g\t%.10g\t%.3f\n", h.batch, h.epoch, h.loss, h.penalty,
                  h.grad_norm, h.wall_ms);
    out += buf;
  }
  return out;
}

void save_run(const TrainRun& run, const std::filesystem::path& dir) {
  ckpt::Checkpoint c;
  c.model = run.model;
  c.optimizer = run.optimizer;
  c.config_hash = run.config_hash;
  c.seed = run.seed;
  c.init_seed = run.init_seed;
  c.diverged = run.diverged;
  c.diverged_at = run.diverged_at;
  const std::string stem = "seed_" + std::to_string(run.seed);
  ckpt::save(c, dir / (stem + ".ckpt"));
  io::atomic_write(dir / (stem + ".log"), format_log(run.history));
}

std::vector<TrainRun> run_experiment_grid(const std::vector<models::Variant>& variants,
                                          const excitation::Dataset& ds, const TrainConfig& cfg,
                                          const plant::TruthParams& truth, std::uint64_t master_seed,
                                          unsigned jobs, const std::optional<std::filesystem::path>& out_dir) {
  const std::size_t n = variants.size() * static_cast<std::size_t>(cfg.seeds);
  std::vector<TrainRun> runs(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto& v = variants[i / cfg.seeds];
    const int s = static_cast<int>(i % cfg.seeds);
    TrainRun run;
    try {
      run = train_model(v, ds, cfg, truth, run_seed(master_seed, v, s));
    } catch (const std::exception& e) {
      // Recorded, the grid carries on.
      run.variant = v;
      run.diverged = true;
      run.diverged_at = std::string("failed: ") + e.what();
    }
    run.seed = s;
    if (out_dir && run.model.n_trainable() > 0) {
      const auto dir = *out_dir / v.slug();
      save_run(run, dir);
      run.checkpoint = dir / ("seed_" + std::to_string(s) + ".ckpt");
    }
    runs[i] = std::move(run);
  });
  return runs;
}

}  // namespace auvid::train
