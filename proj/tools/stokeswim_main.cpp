#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stokeswim/cli.hpp"

// Command-line front end. Every experiment is described by a JSON config; the
// subcommand names mirror the experiment kinds, and `run` dispatches on the
// kind stored in the config.
//
//   stokeswim run --config experiment.json [--out DIR] [--seed N] [--dt X] [--quiet]
//
// Exit codes: 0 success, 2 validation error, 3 planner did not converge.

int main(int argc, char** argv) {
  CLI::App app{"Resistive-force-theory N-link swimmer toolbox"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  double dt = 0.0;
  bool quiet = false;

  const char* kinds[] = {"run",  "simulate", "fields",  "rank",
                         "delta", "scan",     "scallop", "commutator", "plan"};
  std::vector<CLI::App*> subs;
  for (const char* kind : kinds) {
    CLI::App* sub = app.add_subcommand(kind);
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "RNG seed (overrides config)");
    sub->add_option("--dt", dt, "time step (overrides config)");
    sub->add_flag("--quiet", quiet, "suppress progress output");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  const std::string sub_name = app.get_subcommands().front()->get_name();
  stokeswim::CliOverrides overrides;
  if (!out_dir.empty()) overrides.out_dir = out_dir;
  for (const CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--dt")) overrides.dt = dt;
  }
  overrides.quiet = quiet;

  try {
    const stokeswim::ExperimentConfig cfg = stokeswim::load_config(config_path, overrides);
    if (sub_name != "run" && cfg.kind != sub_name) {
      std::cerr << "error: config kind \"" << cfg.kind << "\" does not match subcommand \""
                << sub_name << "\"\n";
      return 2;
    }
    return stokeswim::run_experiment(cfg, std::cout);
  } catch (const stokeswim::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const stokeswim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
}
