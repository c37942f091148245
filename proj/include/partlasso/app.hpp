#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "partlasso/config.hpp"

namespace partlasso {

enum ExitStatus : int {
  exit_ok = 0,
  exit_parse_error = 2,
  exit_validation_error = 3,
  exit_runtime_failure = 4,
};

/// Output directory for a config: output.path, else $PARTLASSO_OUTPUT_DIR, else ".".
std::string resolve_output_dir(const ExperimentConfig& config);

/// Execute an already validated config. Throws on runtime failure; returns the exit status.
int execute(const ExperimentConfig& config, std::ostream& log);

/// Load `config_path`, apply `overrides`, run it and map errors onto exit statuses.
/// Diagnostics go to `log`.
int run(const std::string& config_path, const std::vector<std::string>& overrides,
        std::ostream& log);

}  // namespace partlasso
