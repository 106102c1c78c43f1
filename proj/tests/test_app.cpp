#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "auvid/app.hpp"
#include "auvid/dataset_io.hpp"
#include "auvid/kvconfig.hpp"

using namespace auvid;
using namespace auvid::app;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path root;
  explicit Sandbox(const std::string& name) : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Sandbox() { fs::remove_all(root); }
};

fs::path params_file() { return fs::path(AUVID_SOURCE_DIR) / "config" / "truth_params.ini"; }

GlobalArgs globals(const std::optional<fs::path>& config = std::nullopt) {
  GlobalArgs g;
  g.params = params_file();
  g.config = config;
  g.seed = 3;
  g.jobs = 1;
  return g;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("gen-data") {
  Sandbox box("auvid_app_gen");
  std::ostringstream out, err;
  REQUIRE(cmd_gen_data(globals(), {box.root / "a", std::nullopt, std::nullopt}, out, err) == kOk);
  for (int i = 0; i < 5; ++i) CHECK(fs::exists(box.root / "a" / ("batch_" + std::to_string(i) + ".csv")));
  CHECK(out.str().find("5 batches") != std::string::npos);

  std::ostringstream out2;
  REQUIRE(cmd_gen_data(globals(), {box.root / "b", std::nullopt, std::nullopt}, out2, err) == kOk);
  CHECK(slurp(box.root / "a" / "meta") == slurp(box.root / "b" / "meta"));
  const auto hash_line = [](const std::string& s) { return s.substr(s.find("meta hash")); };
  CHECK(hash_line(out.str()) == hash_line(out2.str()));
}

TEST_CASE("configuration errors exit with status 2") {
  Sandbox box("auvid_app_cfg");
  std::ostringstream out, err;
  SUBCASE("missing params file names the path") {
    auto g = globals();
    g.params = box.root / "missing.ini";
    CHECK(cmd_gen_data(g, {box.root / "d", std::nullopt, std::nullopt}, out, err) == kUsageError);
    CHECK(err.str().find("missing.ini") != std::string::npos);
  }
  SUBCASE("unknown key names the key") {
    write(box.root / "c.ini", "[train]\nlearning_rate = 0.1\n");
    CHECK(cmd_gen_data(globals(box.root / "c.ini"), {box.root / "d", std::nullopt, std::nullopt}, out, err) ==
          kUsageError);
    CHECK(err.str().find("train.learning_rate") != std::string::npos);
  }
  SUBCASE("unknown section") {
    write(box.root / "c.ini", "[extra]\na = 1\n");
    CHECK(cmd_gen_data(globals(box.root / "c.ini"), {box.root / "d", std::nullopt, std::nullopt}, out, err) ==
          kUsageError);
  }
  SUBCASE("bad schedule") {
    CHECK(cmd_gen_data(globals(), {box.root / "d", std::vector<int>{100, 150}, std::nullopt}, out, err) ==
          kUsageError);
    CHECK(err.str().find("train.schedule") != std::string::npos);
  }
  SUBCASE("bad variant") {
    REQUIRE(cmd_gen_data(globals(), {box.root / "d", std::vector<int>{50}, std::nullopt}, out, err) == kOk);
    CHECK(cmd_train(globals(), {"whitebox", box.root / "d", 1, box.root / "runs"}, out, err) == kUsageError);
  }
  SUBCASE("report without an evaluation") {
    CHECK(cmd_report({box.root / "nothing", "csv"}, out, err) == kUsageError);
  }
}

TEST_CASE("config file values and relative params path") {
  Sandbox box("auvid_app_load");
  fs::copy_file(params_file(), box.root / "p.ini");
  write(box.root / "c.ini",
        "; comment\n[run]\nparams = p.ini\nseed = 42\n[dataset]\nschedule = 50,100\n[train]\nlr = 0.002\n"
        "[eval]\ntest_steps = 300\n");
  const auto cfg = AppConfig::load(box.root / "c.ini", "standard", std::nullopt, std::nullopt, std::nullopt);
  CHECK(cfg.seed == 42);
  CHECK(cfg.train.schedule == std::vector<int>{50, 100});
  CHECK(cfg.train.lr == 0.002);
  CHECK(cfg.eval.test_steps == 300);
  CHECK(cfg.truth == plant::TruthParams::defaults());

  const auto small = AppConfig::load(std::nullopt, "small", params_file(), 7, 2);
  CHECK(small.train.schedule == excitation::kDefaultSchedule);
  CHECK(small.train.seeds == 5);
  CHECK(small.train.epochs == 80);
  CHECK(small.eval.test_steps == 5000);
  CHECK(small.seed == 7);
  CHECK(small.jobs == 2);
  CHECK_THROWS_AS(AppConfig::load(std::nullopt, "huge", params_file(), 7, 2), ConfigError);
}

TEST_CASE("full pipeline, resume and variant restriction") {
  Sandbox box("auvid_app_full");
  write(box.root / "c.ini",
        "[dataset]\nschedule = 50,100\n[train]\nepochs = 3\ngraybox_epochs = 20\nseeds = 2\nhidden_layers = 1\n"
        "hidden_width = 8\n[eval]\ntest_steps = 100\n");
  auto g = globals(box.root / "c.ini");
  const fs::path root = box.root / "exp";
  std::ostringstream out, err;
  REQUIRE(cmd_full_experiment(g, {root, std::vector<std::string>{"graybox", "hybrid:0.5"}}, out, err) == kOk);
  for (const char* d : {"dataset/train", "runs/graybox", "runs/hybrid-0.5", "test", "eval"}) {
    CHECK(fs::is_directory(root / d));
  }
  CHECK(!fs::exists(root / "runs" / "blackbox"));
  const auto manifest = kv::read_file(root / "manifest");
  CHECK(manifest.at("manifest").at("stage_report") == "done");
  CHECK(manifest.at("manifest").at("version") == kVersion);
  const auto summary = slurp(root / "eval" / "summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);

  std::ostringstream out2;
  REQUIRE(cmd_full_experiment(g, {root, std::vector<std::string>{"graybox", "hybrid:0.5"}}, out2, err) == kOk);
  CHECK(out2.str().find("[train] skipped") != std::string::npos);
  CHECK(out2.str().find("[gen-data] skipped") != std::string::npos);
  CHECK(slurp(root / "eval" / "summary.csv") == summary);

  std::ostringstream csv, txt;
  CHECK(cmd_report({root / "eval", "csv"}, csv, err) == kOk);
  CHECK(csv.str() == summary);
  CHECK(cmd_report({root / "eval", "txt"}, txt, err) == kOk);
  CHECK(txt.str().find("graybox") != std::string::npos);

  // A second root with the same seed reproduces every checkpoint bit for bit.
  const fs::path root2 = box.root / "exp2";
  std::ostringstream out3;
  REQUIRE(cmd_full_experiment(g, {root2, std::vector<std::string>{"graybox", "hybrid:0.5"}}, out3, err) == kOk);
  CHECK(slurp(root / "runs" / "hybrid-0.5" / "seed_1.ckpt") == slurp(root2 / "runs" / "hybrid-0.5" / "seed_1.ckpt"));
  CHECK(slurp(root / "eval" / "mse.csv") == slurp(root2 / "eval" / "mse.csv"));
}

TEST_CASE("stand-alone train, gen-test and eval") {
  Sandbox box("auvid_app_stages");
  write(box.root / "c.ini",
        "[dataset]\nschedule = 50\n[train]\nepochs = 2\ngraybox_epochs = 5\nseeds = 2\nhidden_layers = 1\n"
        "hidden_width = 8\n[eval]\ntest_steps = 60\n");
  auto g = globals(box.root / "c.ini");
  std::ostringstream out, err;
  REQUIRE(cmd_gen_data(g, {box.root / "ds", std::nullopt, std::nullopt}, out, err) == kOk);
  REQUIRE(cmd_train(g, {"blackbox", box.root / "ds", std::nullopt, box.root / "runs"}, out, err) == kOk);
  REQUIRE(cmd_train(g, {"graybox", box.root / "ds", 1, box.root / "runs"}, out, err) == kOk);
  CHECK(fs::exists(box.root / "runs" / "blackbox" / "seed_1.ckpt"));
  CHECK(!fs::exists(box.root / "runs" / "graybox" / "seed_1.ckpt"));
  REQUIRE(cmd_gen_test(g, {box.root / "test"}, out, err) == kOk);
  REQUIRE(cmd_eval(g, {box.root / "runs", box.root / "test", box.root / "ds", box.root / "eval"}, out, err) == kOk);
  const auto runs = load_runs(box.root / "runs");
  REQUIRE(runs.size() == 3);
  CHECK(runs[0].model.variant.name() == "blackbox");
  CHECK(runs[2].model.variant.name() == "graybox");
  // Missing test set is generated on the fly.
  REQUIRE(cmd_eval(g, {box.root / "runs", box.root / "test2", box.root / "ds", box.root / "eval2"}, out, err) == kOk);
  CHECK(slurp(box.root / "eval" / "mse.csv") == slurp(box.root / "eval2" / "mse.csv"));
}
