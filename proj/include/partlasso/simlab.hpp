#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "partlasso/design.hpp"
#include "partlasso/lasso.hpp"
#include "partlasso/model.hpp"
#include "partlasso/theory.hpp"

namespace partlasso {

enum class DesignFamily { orthogonal, gaussian_iid, gaussian_ar1, theta_controlled };

std::string to_string(DesignFamily family);
DesignFamily parse_design_family(const std::string& name);

struct DesignSpec {
  DesignFamily family = DesignFamily::orthogonal;
  Index n = 100;
  Index p = 50;
  double rho = 0.0;  // gaussian_ar1
  double tau = 0.0;  // theta_controlled: target ||Theta||_inf
  IndexSet g{0};

  bool operator==(const DesignSpec&) const = default;
};

/// Synthetic design, deterministic in (spec, seed).
///
///  - orthogonal: sqrt(n) times an orthonormal basis, so X^T X = n I (needs p <= n).
///  - gaussian_iid: i.i.d. N(0, 1) entries, then normalized.
///  - gaussian_ar1: rows i.i.d. with Cov(x_i, x_j) = rho^|i-j|, then normalized.
///  - theta_controlled: X_G = sqrt(n) Q_G and X_{-G} = X_G Theta* + E with every
///    entry of Theta* equal to tau / (p - |G|), so ||Theta||_inf = tau exactly. E is
///    orthogonal to X_G and has orthogonal columns, scaled to keep column length sqrt(n).
///    Needs p <= n and |G| tau^2 < (p - |G|)^2.
PartitionedDesign generate_design(const DesignSpec& spec, std::uint64_t seed);

/// Compatibility constant known in closed form for the family, valid for any S
/// outside G: 1 for orthogonal, sqrt(1 - |G| tau^2 / (p - |G|)^2) for theta_controlled.
std::optional<double> certified_phi0(const DesignSpec& spec);

enum class Placement { lowest, spread };

std::string to_string(Placement placement);
Placement parse_placement(const std::string& name);

struct Beta0Spec {
  Index s = 3;             // signal columns outside G
  double beta_min = 1.0;   // magnitude, signs alternate +, -, +, ...
  Placement placement = Placement::lowest;
  double g_value = 1.0;    // value of every beta0_G entry

  bool operator==(const Beta0Spec&) const = default;
};

/// Length-p truth. Signals sit at the lowest non-G indices (or evenly spread over them).
Vector make_beta0(const PartitionedDesign& design, const Beta0Spec& spec);

/// Y = X beta0 + sigma z with z ~ N(0, I) from the noise stream of `seed`.
ModelInstance generate_response(std::shared_ptr<const PartitionedDesign> design,
                                const Vector& beta0, double sigma, std::uint64_t seed);

struct MonteCarloConfig {
  DesignSpec design;
  std::uint64_t design_seed = 0;
  Beta0Spec beta0;
  double sigma = 1.0;
  double a = 4.0;
  double level = 0.95;
  Index replicates = 100;
  std::uint64_t base_seed = 1;
  bool debias = false;
  double a_node = 2.0;
  /// Overrides the family's certified value (or the cone search when there is none).
  std::optional<double> phi0;
  Phi0Options phi0_options;
  LassoOptions lasso;
  /// Replicate failure rate above this marks the experiment as failed.
  double max_failure_rate = 0.01;

  bool operator==(const MonteCarloConfig&) const = default;
};

struct ReplicateRecord {
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;

  bool converged = false;
  double kkt_gap = 0.0;
  int iterations = 0;
  Index active_size = 0;

  bool omega0 = false;
  bool bound_holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double delta_inf = 0.0;
  double delta_middle = 0.0;
  double corollary_bound = 0.0;
  bool chain_holds = false;  // both links where Omega0 and the oracle inequality hold, first link always

  Vector beta_g_hat;
  Vector pivot;  // (beta_G_hat - beta0_G)_j / sqrt(cov_jj)
  std::vector<bool> covered;
  bool ellipsoid_covered = false;

  // Present only when debiasing is enabled.
  Vector b_g;
  std::vector<bool> debias_covered;
  Vector gaussian_term;  // (X_G^T X_G)^{-1} X_G^T epsilon
  Vector nodewise_term;  // (1/n) Theta M Xt^T epsilon
};

struct MonteCarloSummary {
  Index replicates = 0;
  Index failures = 0;
  bool failed = false;  // failure rate above the configured threshold
  std::uint64_t seed_first = 0;
  std::uint64_t seed_last = 0;
  IndexSet g;

  double lambda = 0.0;
  double phi0 = 0.0;
  bool phi0_certified = false;
  double prob_floor = 0.0;
  double theta_inf_norm = 0.0;

  Vector coverage_per_coord;
  double ellipsoid_coverage = 0.0;
  double omega0_frequency = 0.0;
  double theorem1_violation_rate_given_omega0 = 0.0;
  double chain_violation_rate = 0.0;
  double mean_delta_inf = 0.0;
  Vector mean_interval_width;
  Vector ks_statistic;
  Vector ks_pvalue;
  double nonconverged_rate = 0.0;

  bool has_debias = false;
  Vector debias_coverage;
  Vector debias_term_correlation;
  double r_inf_norm = 0.0;
};

struct MonteCarloResult {
  MonteCarloSummary summary;
  std::vector<ReplicateRecord> records;
};

/// Fixed design, fresh noise per replicate (seed = base_seed + r). Replicates run
/// under OpenMP; records are stored by index and aggregated in index order, so
/// the result is identical to run_monte_carlo_serial.
MonteCarloResult run_monte_carlo(const MonteCarloConfig& config);

/// Single-threaded reference for run_monte_carlo.
MonteCarloResult run_monte_carlo_serial(const MonteCarloConfig& config);

}  // namespace partlasso
