#pragma once

#include <optional>

#include "partlasso/design.hpp"
#include "partlasso/lasso.hpp"

namespace partlasso {

/// b_{-G} = beta_{-G}_hat + (1/n) M X_{-G}^T (I - P_G)(Y - X_{-G} beta_{-G}_hat).
Vector debias_minus_g(const PartitionedDesign& design, const Vector& y, const LassoFit& lasso_fit,
                      const Matrix& m);

/// b_G = (X_G^T X_G)^{-1} X_G^T (Y - X_{-G} b_{-G}).
Vector debias_g(const PartitionedDesign& design, const Vector& y, const Vector& b_minus_g);

struct Remainder {
  Matrix r;
  double inf_norm = 0.0;
  /// Max elementwise gap between the direct formula and the sample-covariance form
  /// Sigma_GG^{-1} Sigma_{G,-G} (I - M Sigma_tilde).
  double identity_error = 0.0;
};

/// R = Theta - (1/n) Theta M X_{-G}^T (I - P_G) X_{-G}.
/// Throws std::logic_error when the two algebraic forms of R disagree beyond 1e-9 (scaled).
Remainder remainder_matrix(const PartitionedDesign& design, const Matrix& m);

struct NodewiseOptions {
  LassoOptions lasso{.tol = 1e-10, .max_iter = 200000};
  /// Residual variances tau_j^2 below this are treated as collinear.
  double tau_floor = 1e-12;
  /// Absolute correlation in Sigma_tilde above 1 - this is treated as a duplicate column.
  double duplicate_tol = 1e-10;
};

/// Nodewise-Lasso approximation of (Sigma_hat^{-1})_{-G,-G}.
///
/// Row j regresses column j of the residualized block on the remaining columns
/// with penalty `lambda_node` and sets M_jj = 1/tau_j^2, M_jk = -kappa_jk/tau_j^2,
/// where tau_j^2 = x_j^T (x_j - X_{-j} kappa_j) / n. That makes (M Sigma_tilde)_jj = 1.
/// Rows run in parallel under OpenMP; the output does not depend on scheduling.
/// Throws CollinearityError naming the offending column.
Matrix choose_m_nodewise(const PartitionedDesign& design, double lambda_node,
                         const NodewiseOptions& options = {});

/// Single-threaded reference for choose_m_nodewise.
Matrix choose_m_nodewise_serial(const PartitionedDesign& design, double lambda_node,
                                const NodewiseOptions& options = {});

/// Default nodewise penalty: lambda_rule(a_node, 1, n, p - |G|), with a floor at p - |G| = 2.
double default_lambda_node(const PartitionedDesign& design, double a_node = 2.0);

enum class DeltaBoundKind { oracle, assumption_plugin };

/// Inputs for the bias bound when beta0 is not known: the oracle-inequality l1 bound
/// (3 A^2 sigma^2 s log p)/(n phi0^2) * (2/lambda), from user-supplied s and phi0.
struct PluginAssumptions {
  double a = 4.0;
  double sigma = 1.0;
  double s = 1.0;
  double phi0 = 1.0;
};

struct DebiasResult {
  Matrix m;
  Vector b_minus_g;
  Vector b_g;
  Matrix r;
  double r_inf_norm = 0.0;
  double delta_bound = 0.0;
  DeltaBoundKind delta_bound_kind = DeltaBoundKind::oracle;
  /// sigma^2 [(X_G^T X_G)^{-1} + (1/n) Theta M Sigma_tilde M^T Theta^T]:
  /// covariance of the two independent Gaussian terms in b_G.
  Matrix cov;
};

/// Run the full de-biasing step. With `beta0_minus_g` the bias bound uses the
/// actual l1 error; otherwise `assumptions` must be supplied for the plug-in bound.
DebiasResult debias(const PartitionedDesign& design, const Vector& y, const LassoFit& lasso_fit,
                    const Matrix& m, double sigma,
                    const std::optional<Vector>& beta0_minus_g,
                    const std::optional<PluginAssumptions>& assumptions = std::nullopt);

}  // namespace partlasso
