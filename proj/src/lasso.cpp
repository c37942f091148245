#include "partlasso/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "partlasso/errors.hpp"

namespace partlasso {

double lambda_rule(double a, double sigma, Index n, Index p) {
  if (p < 2) throw std::invalid_argument("lambda_rule: p must be at least 2 (log p > 0)");
  if (n < 1) throw std::invalid_argument("lambda_rule: n must be positive");
  return a * sigma * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

LassoProblem LassoProblem::create(Matrix x, Vector y, double lambda) {
  if (x.rows() != y.size()) {
    throw DimensionError("lasso: design has " + std::to_string(x.rows()) +
                         " rows but response has length " + std::to_string(y.size()));
  }
  if (x.rows() < 1) throw DimensionError("lasso: empty problem");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lasso: lambda must be a positive finite number");
  }
  return LassoProblem{std::move(x), std::move(y), lambda};
}

LassoProblem LassoProblem::residualized(const PartitionedDesign& design, const Vector& y,
                                        double lambda) {
  return create(design.residualized(), design.residualize(y), lambda);
}

double LassoProblem::objective(const Vector& beta) const {
  const double nn = static_cast<double>(n());
  return (y - x * beta).squaredNorm() / (2.0 * nn) + lambda * beta.lpNorm<1>();
}

namespace {

double kkt_gap_from_gradient(const Vector& g, const Vector& beta, double lambda, Vector* gamma) {
  double gap = 0.0;
  for (Index j = 0; j < g.size(); ++j) {
    double contrib;
    if (beta(j) != 0.0) {
      const double s = beta(j) > 0.0 ? 1.0 : -1.0;
      contrib = std::abs(g(j) - lambda * s);
      if (gamma) (*gamma)(j) = s;
    } else {
      contrib = std::max(std::abs(g(j)) - lambda, 0.0);
      if (gamma) (*gamma)(j) = std::clamp(g(j) / lambda, -1.0, 1.0);
    }
    gap = std::max(gap, contrib);
  }
  return gap;
}

}  // namespace

KktCertificate kkt_certificate(const LassoProblem& problem, const Vector& beta) {
  if (beta.size() != problem.m()) throw DimensionError("kkt_certificate: beta length differs from m");
  const double n = static_cast<double>(problem.n());
  const Vector g = problem.x.transpose() * (problem.y - problem.x * beta) / n;
  KktCertificate cert;
  cert.gamma.resize(problem.m());
  cert.gap = kkt_gap_from_gradient(g, beta, problem.lambda, &cert.gamma);
  return cert;
}

namespace {

// Coordinate descent state. Either keeps the gradient g = X^T r / n current
// through cached Gram columns, or keeps the residual r current and forms
// g_j on the fly.
class CoordinateDescent {
 public:
  CoordinateDescent(const LassoProblem& problem, const LassoOptions& options, Vector beta)
      : problem_(problem),
        use_gram_(problem.m() <= options.gram_limit),
        n_(static_cast<double>(problem.n())),
        beta_(std::move(beta)) {
    const Index m = problem_.m();
    diag_ = problem_.x.colwise().squaredNorm().transpose() / n_;
    for (Index j = 0; j < m; ++j) {
      if (diag_(j) == 0.0) beta_(j) = 0.0;
    }
    if (use_gram_) gram_cols_.resize(static_cast<std::size_t>(m));
    resync();
  }

  void resync() {
    residual_ = problem_.y - problem_.x * beta_;
    if (use_gram_) grad_ = problem_.x.transpose() * residual_ / n_;
  }

  void sweep() {
    const double lambda = problem_.lambda;
    for (Index j = 0; j < problem_.m(); ++j) {
      const double d = diag_(j);
      if (d == 0.0) continue;
      const double gj = use_gram_ ? grad_(j) : problem_.x.col(j).dot(residual_) / n_;
      const double updated = soft_threshold(d * beta_(j) + gj, lambda) / d;
      const double delta = updated - beta_(j);
      if (delta == 0.0) continue;
      beta_(j) = updated;
      if (use_gram_) {
        grad_.noalias() -= gram_column(j) * (delta / n_);
      } else {
        residual_.noalias() -= problem_.x.col(j) * delta;
      }
    }
  }

  double running_gap() {
    if (!use_gram_) grad_ = problem_.x.transpose() * residual_ / n_;
    return kkt_gap_from_gradient(grad_, beta_, problem_.lambda, nullptr);
  }

  const Vector& beta() const { return beta_; }

 private:
  const Vector& gram_column(Index j) {
    auto& col = gram_cols_[static_cast<std::size_t>(j)];
    if (col.size() == 0) col = problem_.x.transpose() * problem_.x.col(j);
    return col;
  }

  const LassoProblem& problem_;
  bool use_gram_;
  double n_;
  Vector beta_;
  Vector diag_;
  Vector residual_;
  Vector grad_;
  std::vector<Vector> gram_cols_;
};

}  // namespace

LassoFit solve(const LassoProblem& problem, const LassoOptions& options,
               const std::optional<Vector>& warm_start) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("lasso: tol must be positive");
  Vector start = Vector::Zero(problem.m());
  if (warm_start) {
    if (warm_start->size() != problem.m()) throw DimensionError("lasso: warm start length differs from m");
    start = *warm_start;
  }
  CoordinateDescent cd(problem, options, std::move(start));

  LassoFit fit;
  fit.lambda = problem.lambda;
  constexpr int kResyncEvery = 50;
  int sweeps = 0;
  bool converged = false;
  // Zero (or the warm start) may already be optimal.
  if (cd.running_gap() <= options.tol && kkt_certificate(problem, cd.beta()).gap <= options.tol) {
    converged = true;
  }
  while (!converged && sweeps < options.max_iter) {
    cd.sweep();
    ++sweeps;
    if (options.record_objective) fit.objective_trace.push_back(problem.objective(cd.beta()));
    if (sweeps % kResyncEvery == 0) cd.resync();
    if (cd.running_gap() <= options.tol) {
      if (kkt_certificate(problem, cd.beta()).gap <= options.tol) {
        converged = true;
      } else {
        cd.resync();
      }
    }
  }

  fit.beta = cd.beta();
  KktCertificate cert = kkt_certificate(problem, fit.beta);
  fit.gamma = std::move(cert.gamma);
  fit.kkt_gap = cert.gap;
  fit.iterations = sweeps;
  fit.converged = fit.kkt_gap <= options.tol;
  for (Index j = 0; j < fit.beta.size(); ++j) {
    if (fit.beta(j) != 0.0) fit.active_set.push_back(j);
  }
  return fit;
}

std::vector<LassoFit> solve_path(const Matrix& x, const Vector& y,
                                 const std::vector<double>& lambdas,
                                 const LassoOptions& options) {
  std::vector<LassoFit> fits;
  fits.reserve(lambdas.size());
  std::optional<Vector> warm;
  for (double lambda : lambdas) {
    LassoProblem problem = LassoProblem::create(x, y, lambda);
    fits.push_back(solve(problem, options, warm));
    warm = fits.back().beta;
  }
  return fits;
}

}  // namespace partlasso
