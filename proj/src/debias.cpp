#include "partlasso/debias.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include "partlasso/errors.hpp"

namespace partlasso {

Vector debias_minus_g(const PartitionedDesign& design, const Vector& y, const LassoFit& lasso_fit,
                      const Matrix& m) {
  const Index k = design.m();
  if (y.size() != design.n()) throw DimensionError("debias_minus_g: response length differs from n");
  if (lasso_fit.beta.size() != k) throw DimensionError("debias_minus_g: lasso coefficients do not match p - |G|");
  if (m.rows() != k || m.cols() != k) throw DimensionError("debias_minus_g: M must be (p-|G|) x (p-|G|)");
  const double n = static_cast<double>(design.n());
  const Vector resid = design.residualize(Vector(y - design.x_minus_g() * lasso_fit.beta));
  return lasso_fit.beta + m * (design.x_minus_g().transpose() * resid) / n;
}

Vector debias_g(const PartitionedDesign& design, const Vector& y, const Vector& b_minus_g) {
  if (y.size() != design.n()) throw DimensionError("debias_g: response length differs from n");
  if (b_minus_g.size() != design.m()) throw DimensionError("debias_g: b_{-G} length differs from p - |G|");
  return design.solve_g(Vector(y - design.x_minus_g() * b_minus_g));
}

Remainder remainder_matrix(const PartitionedDesign& design, const Matrix& m) {
  const Index k = design.m();
  if (m.rows() != k || m.cols() != k) throw DimensionError("remainder_matrix: M must be (p-|G|) x (p-|G|)");
  const double n = static_cast<double>(design.n());
  const Matrix& theta = design.theta();
  const Matrix& xt = design.residualized();

  Remainder out;
  // X_{-G}^T (I - P_G) X_{-G} = Xt^T Xt since I - P_G is a symmetric idempotent.
  out.r = theta - theta * m * (xt.transpose() * xt) / n;
  out.inf_norm = inf_norm(out.r);

  const PartitionedCovariance cov = partitioned_covariance(design);
  const Matrix m_sigma = m * cov.sigma_tilde;
  const Matrix via_cov =
      cov.g_g.llt().solve(cov.g_minus_g) * (Matrix::Identity(k, k) - m_sigma);
  out.identity_error = k ? (out.r - via_cov).cwiseAbs().maxCoeff() : 0.0;

  const double theta_max = theta.size() ? theta.cwiseAbs().maxCoeff() : 0.0;
  const double ms_max = m_sigma.size() ? m_sigma.cwiseAbs().maxCoeff() : 0.0;
  const double scale = std::max(1.0, theta_max * (1.0 + ms_max * static_cast<double>(k)));
  if (out.identity_error > 1e-9 * scale) {
    throw std::logic_error("remainder_matrix: direct and covariance forms of R disagree by " +
                           std::to_string(out.identity_error));
  }
  return out;
}

double default_lambda_node(const PartitionedDesign& design, double a_node) {
  return lambda_rule(a_node, 1.0, design.n(), std::max<Index>(design.m(), 2));
}

namespace {

void check_nodewise_inputs(const PartitionedDesign& design, double lambda_node,
                           const NodewiseOptions& options) {
  if (!(lambda_node > 0.0)) throw std::invalid_argument("choose_m_nodewise: lambda_node must be positive");
  const Matrix& xt = design.residualized();
  const double n = static_cast<double>(design.n());
  const Matrix sigma = xt.transpose() * xt / n;
  const Index k = design.m();
  for (Index j = 0; j < k; ++j) {
    if (sigma(j, j) < options.tau_floor) {
      throw CollinearityError("residualized column " + std::to_string(j) +
                                  " vanishes after projecting out X_G",
                              j);
    }
  }
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < j; ++i) {
      const double corr = std::abs(sigma(i, j)) / std::sqrt(sigma(i, i) * sigma(j, j));
      if (corr >= 1.0 - options.duplicate_tol) {
        throw CollinearityError("residualized columns " + std::to_string(i) + " and " +
                                    std::to_string(j) + " are collinear",
                                j);
      }
    }
  }
}

// Row j of M, written into `row`.
void nodewise_row(const Matrix& xt, Index j, double lambda_node, const NodewiseOptions& options,
                  Eigen::Ref<Vector> row) {
  const Index k = xt.cols();
  const double n = static_cast<double>(xt.rows());
  const Vector target = xt.col(j);
  Vector kappa = Vector::Zero(k - 1);
  if (k > 1) {
    Matrix others(xt.rows(), k - 1);
    others << xt.leftCols(j), xt.rightCols(k - 1 - j);
    LassoFit fit = solve(LassoProblem::create(std::move(others), target, lambda_node), options.lasso);
    kappa = fit.beta;
  }
  Vector fitted = Vector::Zero(xt.rows());
  for (Index c = 0, col = 0; col < k; ++col) {
    if (col == j) continue;
    fitted += kappa(c++) * xt.col(col);
  }
  const double tau_sq = target.dot(target - fitted) / n;
  if (!(tau_sq > options.tau_floor)) {
    throw CollinearityError("nodewise residual variance for column " + std::to_string(j) +
                                " is below " + std::to_string(options.tau_floor),
                            j);
  }
  row.setZero();
  row(j) = 1.0 / tau_sq;
  for (Index c = 0, col = 0; col < k; ++col) {
    if (col == j) continue;
    row(col) = -kappa(c++) / tau_sq;
  }
}

}  // namespace

Matrix choose_m_nodewise(const PartitionedDesign& design, double lambda_node,
                         const NodewiseOptions& options) {
  check_nodewise_inputs(design, lambda_node, options);
  const Matrix& xt = design.residualized();
  const Index k = design.m();
  // Row-major so each thread writes a contiguous row.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(k, k);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));

#pragma omp parallel for schedule(dynamic)
  for (Index j = 0; j < k; ++j) {
    try {
      Vector row(k);
      nodewise_row(xt, j, lambda_node, options, row);
      m.row(j) = row.transpose();
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return m;
}

Matrix choose_m_nodewise_serial(const PartitionedDesign& design, double lambda_node,
                                const NodewiseOptions& options) {
  check_nodewise_inputs(design, lambda_node, options);
  const Matrix& xt = design.residualized();
  const Index k = design.m();
  Matrix m(k, k);
  for (Index j = 0; j < k; ++j) {
    Vector row(k);
    nodewise_row(xt, j, lambda_node, options, row);
    m.row(j) = row.transpose();
  }
  return m;
}

DebiasResult debias(const PartitionedDesign& design, const Vector& y, const LassoFit& lasso_fit,
                    const Matrix& m, double sigma, const std::optional<Vector>& beta0_minus_g,
                    const std::optional<PluginAssumptions>& assumptions) {
  if (!(sigma > 0.0)) throw std::invalid_argument("debias: sigma must be positive");
  DebiasResult out;
  out.m = m;
  out.b_minus_g = debias_minus_g(design, y, lasso_fit, m);
  out.b_g = debias_g(design, y, out.b_minus_g);
  Remainder rem = remainder_matrix(design, m);
  out.r = std::move(rem.r);
  out.r_inf_norm = rem.inf_norm;

  if (beta0_minus_g) {
    if (beta0_minus_g->size() != design.m()) throw DimensionError("debias: beta0 length differs from p - |G|");
    out.delta_bound = out.r_inf_norm * (lasso_fit.beta - *beta0_minus_g).lpNorm<1>();
    out.delta_bound_kind = DeltaBoundKind::oracle;
  } else {
    if (!assumptions) {
      throw std::invalid_argument("debias: either beta0 or plug-in assumptions (s, phi0) are required");
    }
    const auto& a = *assumptions;
    if (!(a.phi0 > 0.0) || !(lasso_fit.lambda > 0.0)) {
      throw std::invalid_argument("debias: plug-in bound needs phi0 > 0 and lambda > 0");
    }
    const double n = static_cast<double>(design.n());
    const double logp = std::log(static_cast<double>(design.p()));
    const double l1 = 3.0 * a.a * a.a * a.sigma * a.sigma * a.s * logp / (n * a.phi0 * a.phi0) *
                      (2.0 / lasso_fit.lambda);
    out.delta_bound = out.r_inf_norm * l1;
    out.delta_bound_kind = DeltaBoundKind::assumption_plugin;
  }

  const double n = static_cast<double>(design.n());
  const Matrix& theta = design.theta();
  const Matrix& xt = design.residualized();
  const Matrix tm = theta * m;
  out.cov = sigma * sigma *
            (design.gram_g_inverse() + tm * (xt.transpose() * xt) * tm.transpose() / (n * n));
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

}  // namespace partlasso
