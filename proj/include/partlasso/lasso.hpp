#pragma once

#include <optional>
#include <vector>

#include "partlasso/design.hpp"

namespace partlasso {

/// lambda = A * sigma * sqrt(log p / n). Requires p >= 2; sigma = 0 gives 0.
double lambda_rule(double a, double sigma, Index n, Index p);

/// A plain Lasso in the scaling
///
///     minimize (1/(2n)) ||y - X b||^2 + lambda ||b||_1,
///
/// whose stationarity condition is (1/n) X^T (y - X b) = lambda * gamma.
/// For the partially penalized problem, x = (I - P_G) X_{-G} and y = (I - P_G) Y.
struct LassoProblem {
  Matrix x;
  Vector y;
  double lambda;

  /// Validates shapes and lambda > 0.
  static LassoProblem create(Matrix x, Vector y, double lambda);
  /// Residualized problem built from a partitioned design and a raw response.
  static LassoProblem residualized(const PartitionedDesign& design, const Vector& y,
                                   double lambda);

  Index n() const { return x.rows(); }
  Index m() const { return x.cols(); }
  double objective(const Vector& beta) const;
};

struct KktCertificate {
  Vector gamma;
  double gap = 0.0;
};

/// Evaluate the KKT conditions at `beta`. For active j the contribution is
/// |g_j - lambda sign(beta_j)|, for inactive j it is max(|g_j| - lambda, 0),
/// with g = X^T (y - X beta) / n.
KktCertificate kkt_certificate(const LassoProblem& problem, const Vector& beta);

struct LassoOptions {
  double tol = 1e-8;
  int max_iter = 100000;
  /// Columns above this count use residual updates instead of a cached Gram.
  Index gram_limit = 2000;
  bool record_objective = false;

  bool operator==(const LassoOptions&) const = default;
};

struct LassoFit {
  Vector beta;
  IndexSet active_set;
  Vector gamma;
  double kkt_gap = 0.0;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // one entry per sweep, when requested
};

/// Cyclic coordinate descent, stopped on KKT gap <= tol.
/// `warm_start` seeds the coefficients (e.g. the previous fit on a descending lambda path).
LassoFit solve(const LassoProblem& problem, const LassoOptions& options = {},
               const std::optional<Vector>& warm_start = std::nullopt);

/// Fits along a lambda sequence, warm-starting each fit from the previous one.
std::vector<LassoFit> solve_path(const Matrix& x, const Vector& y,
                                 const std::vector<double>& lambdas,
                                 const LassoOptions& options = {});

/// Scalar soft threshold sign(z) max(|z| - t, 0).
inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace partlasso
