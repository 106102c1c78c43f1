#include <CLI11.hpp>

#include <iostream>

#include "auvid/app.hpp"

using namespace auvid::app;

int main(int argc, char** argv) {
  CLI::App cli{"System identification of an underwater vehicle with constrained neural ODEs"};
  cli.set_version_flag("--version", kVersion);
  cli.require_subcommand(1);
  cli.fallthrough();

  GlobalArgs g;
  std::string config, params;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  cli.add_option("--config", config, "INI configuration file")->check(CLI::ExistingFile);
  cli.add_option("--params", params, "truth parameter file (overrides run.params)");
  auto* seed_opt = cli.add_option("--seed", seed, "master seed");
  auto* jobs_opt = cli.add_option("--jobs", jobs, "worker threads (0: all cores)");
  cli.add_option("--preset", g.preset, "standard or small")->check(CLI::IsMember({"standard", "small"}));

  GenDataArgs gen;
  std::vector<int> schedule;
  double delta = 0.0;
  auto* c_gen = cli.add_subcommand("gen-data", "generate the training dataset");
  c_gen->add_option("--out", gen.out, "output directory")->required();
  auto* sched_opt = c_gen->add_option("--schedule", schedule, "batch lengths in steps")->delimiter(',');
  auto* delta_opt = c_gen->add_option("--delta", delta, "sampling period in seconds");

  TrainArgs tr;
  int seeds = 0;
  auto* c_train = cli.add_subcommand("train", "train one model variant (or 'all')");
  c_train->add_option("--variant", tr.variant, "blackbox, cblackbox, graybox, hybrid:<e_mu> or all")->required();
  c_train->add_option("--dataset", tr.dataset, "dataset directory")->required();
  auto* seeds_opt = c_train->add_option("--seeds", seeds, "number of seeds");
  c_train->add_option("--out", tr.out, "runs directory")->required();

  GenTestArgs gt;
  auto* c_test = cli.add_subcommand("gen-test", "generate the held-out test set");
  c_test->add_option("--out", gt.out, "output directory")->required();

  EvalArgs ev;
  auto* c_eval = cli.add_subcommand("eval", "evaluate trained runs on the test set");
  c_eval->add_option("--runs", ev.runs, "runs directory")->required();
  c_eval->add_option("--test", ev.test, "test set directory (generated when missing)")->required();
  c_eval->add_option("--dataset", ev.dataset, "training dataset (normalization statistics)")->required();
  c_eval->add_option("--out", ev.out, "output directory")->required();

  ReportArgs rep;
  auto* c_report = cli.add_subcommand("report", "print an evaluation summary");
  c_report->add_option("--eval", rep.eval, "evaluation directory")->required();
  c_report->add_option("--format", rep.format, "csv or txt")->check(CLI::IsMember({"csv", "txt"}));

  FullArgs full;
  std::vector<std::string> variants;
  auto* c_full = cli.add_subcommand("full", "run every stage, resuming completed ones");
  c_full->add_option("--out", full.out, "experiment root")->required();
  auto* var_opt = c_full->add_option("--variants", variants, "subset of variants")->delimiter(',');

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? kOk : kUsageError;
  }

  if (!config.empty()) g.config = config;
  if (!params.empty()) g.params = params;
  if (*seed_opt) g.seed = seed;
  if (*jobs_opt) g.jobs = jobs;

  if (*c_gen) {
    if (*sched_opt) gen.schedule = schedule;
    if (*delta_opt) gen.delta = delta;
    return cmd_gen_data(g, gen, std::cout, std::cerr);
  }
  if (*c_train) {
    if (*seeds_opt) tr.seeds = seeds;
    return cmd_train(g, tr, std::cout, std::cerr);
  }
  if (*c_test) return cmd_gen_test(g, gt, std::cout, std::cerr);
  if (*c_eval) return cmd_eval(g, ev, std::cout, std::cerr);
  if (*c_report) return cmd_report(rep, std::cout, std::cerr);
  if (*var_opt) full.variants = variants;
  return cmd_full_experiment(g, full, std::cout, std::cerr);
}
