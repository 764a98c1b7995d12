#pragma once

#include <optional>
#include <string>

#include "stokeswim/io.hpp"

// Experiment front end shared by the command-line tool and the tests:
// JSON config ingestion with field-level validation, dispatch to the modules,
// and machine-readable artifacts (CSV tables/series + JSON reports).

namespace stokeswim {

struct ExperimentConfig {
  LinkChain chain;
  DragCoefficients drag;
  std::string kind;      // simulate | fields | rank | delta | scan | scallop
                         // | commutator | plan
  Json experiment;       // kind-specific parameters
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  double dt = 1e-3;
  bool quiet = false;
};

struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  bool quiet = false;
};

// Parses and validates; throws ConfigInvalid with a field-level message.
ExperimentConfig parse_config(const Json& j, const CliOverrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const CliOverrides& overrides = {});

// Runs the experiment and writes its artifacts under config.out_dir.
// Returns 0 on success, 3 when a planner run did not converge.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace stokeswim
