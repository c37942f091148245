#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "partlasso/config.hpp"
#include "partlasso/debias.hpp"
#include "partlasso/inference.hpp"
#include "partlasso/simlab.hpp"
#include "partlasso/theory.hpp"

namespace partlasso {

/// Written into every output file: `# config_hash=... base_seed=...` as the
/// first CSV line, or a "meta" object in JSON.
struct OutputMeta {
  std::string config_hash;
  std::uint64_t base_seed = 0;
};

// Output layout
//
// CSV files hold a header row and data rows; numbers use the shortest text that
// round-trips the double. Per-coordinate quantities are flattened into columns
// suffixed with the original G column index, e.g. coverage_3. JSON files hold one
// object whose keys match the struct field names, with vectors as arrays.

void write_summary(const MonteCarloSummary& summary, OutputFormat format, const std::string& path,
                   const OutputMeta& meta);
MonteCarloSummary read_summary(const std::string& path, OutputFormat format);

/// Per-replicate rows: seed, omega0, bound_holds, lhs, rhs, delta_inf, covered_j, ...
/// An empty record list gives a header-only CSV.
void write_replicates(const std::vector<ReplicateRecord>& records, const IndexSet& g, bool debias,
                      OutputFormat format, const std::string& path, const OutputMeta& meta);

void write_partial_fit(const PartialFit& fit, const ConfidenceRegion& region, const IndexSet& g,
                       bool sigma_estimated, OutputFormat format, const std::string& path,
                       const OutputMeta& meta);

void write_debias(const DebiasResult& result, const ConfidenceRegion& region, const IndexSet& g,
                  OutputFormat format, const std::string& path, const OutputMeta& meta);

/// Design-level quantities reported by the theory mode.
struct TheoryReport {
  CompatibilityReport phi0;
  std::optional<double> family_phi0;
  Index s = 0;
  double lambda = 0.0;
  double prob_floor = 0.0;
  double theta_inf_norm = 0.0;
  double corollary_bound = 0.0;  // evaluated at phi0.phi0_lower
};

void write_theory(const TheoryReport& report, OutputFormat format, const std::string& path,
                  const OutputMeta& meta);

}  // namespace partlasso
