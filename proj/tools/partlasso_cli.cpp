// partlasso run --config <path> [--set key=value]...
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "partlasso/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Partially penalized Lasso: fits, simulations and theory diagnostics"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("--config", config_path, "Config file (key = value lines)")->required();
  run->add_option("--set", overrides, "Override a config key, key=value (repeatable)")
      ->allow_extra_args(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : partlasso::exit_parse_error;
  }
  return partlasso::run(config_path, overrides, std::cerr);
}
