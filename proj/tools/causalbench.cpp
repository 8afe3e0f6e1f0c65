#include <csignal>

#include "CLI11.hpp"

#include "causalbench/cli/commands.hpp"

namespace {

void on_sigint(int) { causalbench::interrupt_flag().store(true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperparameter sensitivity benchmark for causal structure learning"};
  app.require_subcommand(1);
  causalbench::CommandLine cl;
  int workers = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", cl.config_path, "run configuration (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", cl.out, "output directory (overrides the config)");
  };
  auto* simulate = app.add_subcommand("simulate", "write simulated datasets and truth graphs");
  add_common(simulate, true);
  auto* run = app.add_subcommand("run", "run the sweep, resuming an existing store");
  add_common(run, true);
  run->add_option("--workers", workers, "parallel workers")->check(CLI::PositiveNumber);
  auto* aggregate = app.add_subcommand("aggregate", "strategy tables from a store");
  add_common(aggregate, false);
  auto* report = app.add_subcommand("report", "CSV and SVG reports from a store");
  add_common(report, false);
  report->add_option("kind", cl.report_kind, "strategy-bars | distributions | winners | gaps | recommend")
      ->required()
      ->check(CLI::IsMember(causalbench::report_kinds()));
  report->add_option("--group-by", cl.group_by, "comma-separated setting dimensions");
  report->add_option("--strategy", cl.strategy, "best | worst | default | sim_mean");
  app.add_subcommand("list-algorithms", "registry of algorithms and hyperparameter spaces as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : causalbench::kExitConfig;
  }
  cl.command = app.get_subcommands().front()->get_name();
  if (workers > 0) cl.workers = workers;
  std::signal(SIGINT, on_sigint);
  return causalbench::run_command(cl);
}
