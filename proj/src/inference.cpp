#include "partlasso/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "partlasso/errors.hpp"
#include "partlasso/stats.hpp"

namespace partlasso {

PartialFit fit_partial(const PartitionedDesign& design, const Vector& y, const LassoFit& lasso_fit,
                       double sigma) {
  if (y.size() != design.n()) throw DimensionError("fit_partial: response length differs from n");
  if (lasso_fit.beta.size() != design.m()) {
    throw DimensionError("fit_partial: lasso coefficients do not match p - |G|");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("fit_partial: sigma must be positive");

  PartialFit fit;
  fit.sigma = sigma;
  fit.lasso_fit = lasso_fit;
  fit.beta_g_hat = design.solve_g(Vector(y - design.x_minus_g() * lasso_fit.beta));
  fit.cov = sigma * sigma * design.gram_g_inverse();
  if (!lasso_fit.converged) {
    fit.warnings.push_back("lasso did not converge: kkt_gap = " + std::to_string(lasso_fit.kkt_gap));
  }
  return fit;
}

double estimate_sigma(const PartitionedDesign& design, const Vector& y, const LassoFit& lasso_fit) {
  const Index dof = design.n() - design.g_size() - static_cast<Index>(lasso_fit.active_set.size());
  if (dof <= 0) throw std::invalid_argument("estimate_sigma: no residual degrees of freedom");
  const Vector r = design.residualize(Vector(y - design.x_minus_g() * lasso_fit.beta));
  return std::sqrt(r.squaredNorm() / static_cast<double>(dof));
}

bool ConfidenceRegion::interval_contains(Index j, double value) const {
  return lower(j) <= value && value <= upper(j);
}

bool ConfidenceRegion::ellipsoid_contains(const Vector& b) const {
  const Vector d = center - b;
  return d.dot(cov.llt().solve(d)) <= radius_sq;
}

ConfidenceRegion confidence_region(const Vector& center, const Matrix& cov, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence_region: level must lie in (0, 1)");
  }
  if (cov.rows() != center.size() || cov.cols() != center.size()) {
    throw DimensionError("confidence_region: covariance shape differs from center");
  }
  ConfidenceRegion region;
  region.level = level;
  region.center = center;
  region.cov = cov;
  const double z = stats::normal_quantile(0.5 * (1.0 + level));
  region.half_width = z * cov.diagonal().cwiseSqrt();
  region.lower = center - region.half_width;
  region.upper = center + region.half_width;
  region.radius_sq = stats::chi_square_quantile(level, static_cast<double>(center.size()));
  return region;
}

ConfidenceRegion confidence_region(const PartialFit& fit, double level) {
  return confidence_region(fit.beta_g_hat, fit.cov, level);
}

DeltaDiagnostic delta_diagnostic(const PartitionedDesign& design, const LassoFit& lasso_fit,
                                 const Vector& beta0_minus_g) {
  if (beta0_minus_g.size() != design.m() || lasso_fit.beta.size() != design.m()) {
    throw DimensionError("delta_diagnostic: coefficient length differs from p - |G|");
  }
  const double root_n = std::sqrt(static_cast<double>(design.n()));
  const Vector err = lasso_fit.beta - beta0_minus_g;
  DeltaDiagnostic out;
  out.delta = root_n * (design.theta() * err);
  out.delta_inf = out.delta.size() ? out.delta.lpNorm<Eigen::Infinity>() : 0.0;
  out.bound = inf_norm(design.theta()) * root_n * err.lpNorm<1>();
  if (out.delta_inf > out.bound * (1.0 + 1e-12) + 1e-300) {
    throw std::logic_error("delta_diagnostic: ||delta||_inf exceeds its matrix-norm bound");
  }
  return out;
}

}  // namespace partlasso
