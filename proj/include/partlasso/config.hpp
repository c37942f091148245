#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "partlasso/simlab.hpp"

namespace partlasso {

/// Malformed config text (exit status 2).
class ConfigParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed text with an invalid or missing field (exit status 3).
class ConfigValidationError : public std::runtime_error {
 public:
  ConfigValidationError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class Mode { fit, simulate, theory };
enum class OutputFormat { csv, json };

std::string to_string(Mode mode);
std::string to_string(OutputFormat format);

/// Everything a run needs. Config files are flat `key = value` lines with `#`
/// comments; nested settings use dotted keys such as `design.family` or `beta0.s`.
/// Column indices (G) are 0-based.
struct ExperimentConfig {
  Mode mode = Mode::simulate;
  MonteCarloConfig sim;

  // fit mode
  std::string data_x;
  std::string data_y;
  bool estimate_sigma = false;
  Index fit_s = 0;  // assumed sparsity for the plug-in de-biasing bound

  std::string output_path;  // empty: $PARTLASSO_OUTPUT_DIR, then "."
  OutputFormat format = OutputFormat::csv;
  int threads = 0;  // 0 keeps the OpenMP default

  bool operator==(const ExperimentConfig&) const = default;
};

using KeyValues = std::map<std::string, std::string>;

/// Parse `key = value` text. Later duplicates replace earlier ones.
KeyValues parse_key_values(const std::string& text);

/// Apply `key=value` overrides on top of `base`.
void apply_overrides(KeyValues& base, const std::vector<std::string>& overrides);

/// Convert and validate. Throws ConfigValidationError naming the field.
ExperimentConfig config_from_key_values(const KeyValues& kv);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical text form; every key is written, in a fixed order.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a 64-bit hash of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace partlasso
