#pragma once

#include <string>
#include <vector>

#include "partlasso/design.hpp"
#include "partlasso/lasso.hpp"

namespace partlasso {

/// Estimate of the unpenalized block together with its exact Gaussian covariance.
struct PartialFit {
  Vector beta_g_hat;
  Matrix cov;  // sigma^2 (X_G^T X_G)^{-1}
  double sigma = 0.0;
  LassoFit lasso_fit;
  std::vector<std::string> warnings;

  /// False when the penalized block did not meet its KKT tolerance.
  bool trusted() const { return lasso_fit.converged; }
};

/// beta_G_hat = (X_G^T X_G)^{-1} X_G^T (Y - X_{-G} beta_{-G}_hat), cov = sigma^2 (X_G^T X_G)^{-1}.
PartialFit fit_partial(const PartitionedDesign& design, const Vector& y, const LassoFit& lasso_fit,
                       double sigma);

/// Plug-in noise level ||(I - P_G)(Y - X_{-G} beta)||^2 / (n - |G| - |active set|).
/// Not covered by the known-sigma theory; callers should label results that use it.
double estimate_sigma(const PartitionedDesign& design, const Vector& y, const LassoFit& lasso_fit);

struct ConfidenceRegion {
  double level = 0.0;
  Vector center;
  Vector lower;
  Vector upper;
  Vector half_width;
  /// Ellipsoid {b : (center - b)^T cov^{-1} (center - b) <= radius_sq}.
  Matrix cov;
  double radius_sq = 0.0;

  bool interval_contains(Index j, double value) const;
  bool ellipsoid_contains(const Vector& b) const;
};

/// Per-coordinate intervals center_j +/- z_{(1+level)/2} sqrt(cov_jj), and the
/// chi-square ellipsoid at the same level. Throws std::invalid_argument
/// unless 0 < level < 1.
ConfidenceRegion confidence_region(const Vector& center, const Matrix& cov, double level);
ConfidenceRegion confidence_region(const PartialFit& fit, double level);

struct DeltaDiagnostic {
  Vector delta;       // sqrt(n) Theta (beta_{-G}_hat - beta0_{-G})
  double delta_inf = 0.0;
  double bound = 0.0;  // ||Theta||_inf sqrt(n) ||beta_{-G}_hat - beta0_{-G}||_1
};

/// Bias term that separates sqrt(n)(beta_G_hat - beta0_G) from its Gaussian part.
/// Throws std::logic_error if ||delta||_inf exceeds the bound beyond rounding.
DeltaDiagnostic delta_diagnostic(const PartitionedDesign& design, const LassoFit& lasso_fit,
                                 const Vector& beta0_minus_g);

}  // namespace partlasso
