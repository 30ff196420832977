#include "mhdlag/cli.hpp"
#include "mhdlag/snapshot.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace mhdlag;

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian free-boundary MHD solver"};
  app.require_subcommand(1, 1);

  std::string config_path, out;
  std::uint64_t seed = 0;
  int halve = 0;
  int workers = 1;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  };
  CLI::App* check = app.add_subcommand("check", "compatibility of the initial data");
  CLI::App* run = app.add_subcommand("run", "solve and write summary, CSV and snapshots");
  CLI::App* probe = app.add_subcommand("probe", "inequality probes");
  CLI::App* push = app.add_subcommand("pushfwd", "Eulerian push-forward of a finished run");
  for (auto* sub : {check, run, probe, push}) common(sub);
  run->add_option("--halve-T", halve, "retry with T / 2 up to n times after non-contraction")
      ->check(CLI::Range(0, 3));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return e.get_exit_code() == 0 ? code : exit_usage;
  }

  try {
    RunConfig config = load_config(config_path);
    if (!out.empty()) config.out = out;
    config.workers = workers;
    for (auto* sub : {check, run, probe, push})
      if (sub->count("--seed")) config.seed = seed;
    if (*check) return cmd_check(config);
    if (*run) return cmd_run(config, halve);
    if (*probe) return cmd_probe(config);
    return cmd_pushfwd(config);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_usage;
  } catch (const SnapshotError& e) {
    std::cerr << "snapshot error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_diagnostic;
  }
}
