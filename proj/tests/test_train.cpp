#include <doctest.h>

#include <filesystem>

#include "auvid/checkpoint.hpp"
#include "auvid/spectral.hpp"
#include "auvid/train.hpp"

using namespace auvid;
using namespace auvid::train;

namespace {

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.schedule = {50, 100};
  cfg.epochs = 8;
  cfg.graybox_epochs = 8;
  cfg.seeds = 2;
  cfg.model.mlp_dims = {11, 16, 16, 8};
  return cfg;
}

const plant::TruthParams& truth() {
  static const auto t = plant::TruthParams::defaults();
  return t;
}

const excitation::Dataset& tiny_dataset() {
  static const auto ds = excitation::build_dataset({50, 100}, 0.01, truth(), 31);
  return ds;
}

}  // namespace

TEST_CASE("config validation names the key") {
  TrainConfig cfg;
  cfg.schedule = {100, 300};
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("train.schedule"), ConfigError);
  cfg = TrainConfig{};
  cfg.lr = -1;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("train.lr"), ConfigError);
  cfg = TrainConfig{};
  cfg.model.blackbox_bounds = {1.0, 0.5};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config document round trip") {
  auto cfg = tiny_config();
  cfg.lr = 0.0025;
  kv::Document doc;
  cfg.to_document(doc);
  const auto back = TrainConfig::from_document(doc);
  CHECK(back.hash() == cfg.hash());
  CHECK(back.model.mlp_dims == cfg.model.mlp_dims);
  doc["train"]["bogus"] = "1";
  CHECK_THROWS_AS(TrainConfig::from_document(doc), ConfigError);
}

TEST_CASE("zero epochs returns the initialization") {
  auto cfg = tiny_config();
  cfg.epochs = 0;
  cfg.graybox_epochs = 0;
  for (const auto& v : models::Variant::all()) {
    const auto run = train_model(v, tiny_dataset(), cfg, truth(), 5);
    CHECK(run.model == run.initial);
    CHECK(run.history.empty());
  }
}

TEST_CASE("spectral bounds hold after every optimizer step") {
  const auto cfg = tiny_config();
  for (const char* name : {"cblackbox", "hybrid:0.5"}) {
    const auto v = models::Variant::parse(name);
    double worst = 0.0;
    int steps = 0;
    const auto run = train_model(v, tiny_dataset(), cfg, truth(), 6, [&](const models::TrainableModel& m, int, int) {
      worst = std::max(worst, nn::spectral_violation(*m.mlp, *m.bounds));
      ++steps;
    });
    CHECK(steps > 0);
    CHECK(worst <= 1e-6);
    CHECK(nn::spectral_violation(*run.model.mlp, *run.model.bounds) <= 1e-6);
  }
}

TEST_CASE("hybrid keeps its offset parameters frozen") {
  const auto run = train_model(models::Variant::parse("hybrid:1.0"), tiny_dataset(), tiny_config(), truth(), 7);
  CHECK(run.model.gray->mu == run.initial.gray->mu);
  CHECK(!(run.model.mlp->params() == run.initial.mlp->params()));
}

TEST_CASE("graybox loss decreases and the log is complete") {
  auto cfg = tiny_config();
  cfg.graybox_epochs = 60;
  const auto run = train_model(models::Variant::parse("graybox"), tiny_dataset(), cfg, truth(), 8);
  REQUIRE(!run.history.empty());
  CHECK(run.history.back().loss < run.history.front().loss);
  CHECK(!run.diverged);
  const auto log = format_log(run.history);
  CHECK(log.rfind("batch\tepoch\tloss\tpenalty\tgrad_norm\twall_ms\n", 0) == 0);
  CHECK(std::count(log.begin(), log.end(), '\n') == static_cast<long>(run.history.size()) + 1);
}

TEST_CASE("graybox recovers the coefficients from the default dataset") {
  const auto ds = excitation::build_dataset(excitation::kDefaultSchedule, 0.01, truth(), 1);
  TrainConfig cfg;
  const auto mu = truth().mu();
  for (std::uint64_t s = 0; s < 2; ++s) {
    const auto run = train_model(models::Variant::parse("graybox"), ds, cfg, truth(), run_seed(1, models::Variant::parse("graybox"), static_cast<int>(s)));
    const auto err = ((run.model.gray->mu - mu).array() / mu.array()).abs().maxCoeff();
    MESSAGE("max relative error " << err);
    CHECK(err <= 0.05);
  }
}

TEST_CASE("grid: counts, determinism, persistence") {
  const auto dir = std::filesystem::temp_directory_path() / "auvid_test_grid";
  std::filesystem::remove_all(dir);
  const auto cfg = tiny_config();
  const auto variants = models::Variant::all();
  const auto a = run_experiment_grid(variants, tiny_dataset(), cfg, truth(), 3, 1, dir);
  CHECK(a.size() == variants.size() * 2);
  const auto b = run_experiment_grid(variants, tiny_dataset(), cfg, truth(), 3, 1, std::nullopt);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].model == b[i].model);
    CHECK(a[i].seed == static_cast<int>(i % 2));
  }
  const auto threaded = run_experiment_grid(variants, tiny_dataset(), cfg, truth(), 3, 3, std::nullopt);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(threaded[i].model == a[i].model);
  // Seeds depend on the variant name only, not on which variants run together.
  const auto solo = run_experiment_grid({variants[3]}, tiny_dataset(), cfg, truth(), 3, 1, std::nullopt);
  CHECK(solo[1].model == a[7].model);

  const auto ck = ckpt::load(dir / "hybrid-0.5" / "seed_1.ckpt");
  CHECK(ck.model == a[7].model);
  CHECK(ck.seed == 1);
  CHECK(ck.config_hash == cfg.hash());
  CHECK(ck.optimizer.step == a[7].optimizer.step);
  CHECK(std::filesystem::exists(dir / "graybox" / "seed_0.log"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("checkpoint JSON round trip is exact") {
  const auto run = train_model(models::Variant::parse("cblackbox"), tiny_dataset(), tiny_config(), truth(), 9);
  ckpt::Checkpoint c;
  c.model = run.model;
  c.optimizer = run.optimizer;
  c.config_hash = "abc";
  c.seed = 4;
  c.init_seed = 9;
  const auto back = ckpt::from_json(ckpt::to_json(c));
  CHECK(back.model == c.model);
  CHECK(back.optimizer.m == c.optimizer.m);
  CHECK(back.optimizer.v == c.optimizer.v);
  CHECK(back.init_seed == 9);
  CHECK_THROWS(ckpt::from_json("{\"format\": \"other\"}"));
}

TEST_CASE("dataset schedule must match the config") {
  auto cfg = tiny_config();
  cfg.schedule = {100, 200};
  CHECK_THROWS_AS(train_model(models::Variant::parse("graybox"), tiny_dataset(), cfg, truth(), 1), ConfigError);
}
