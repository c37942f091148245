#include "partlasso/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "partlasso/errors.hpp"

namespace partlasso {

Vector column_scale_factors(const Matrix& x_raw) {
  const double target = std::sqrt(static_cast<double>(x_raw.rows()));
  Vector scale(x_raw.cols());
  for (Index j = 0; j < x_raw.cols(); ++j) {
    const double norm = x_raw.col(j).norm();
    if (norm == 0.0) {
      throw ZeroColumnError("column " + std::to_string(j) + " is identically zero", j);
    }
    scale(j) = target / norm;
  }
  return scale;
}

Matrix normalize_columns(const Matrix& x_raw) {
  return x_raw * column_scale_factors(x_raw).asDiagonal();
}

PartitionedDesign::PartitionedDesign(const Matrix& x_raw, IndexSet g)
    : g_(std::move(g)), theta_cache_(std::make_shared<ThetaCache>()) {
  const Index n = x_raw.rows();
  const Index p = x_raw.cols();
  if (n < 1 || p < 1) throw DimensionError("design must be non-empty");
  if (g_.empty()) throw DimensionError("G must contain at least one column");
  if (static_cast<Index>(g_.size()) > n) {
    throw RankDeficiencyError("|G| = " + std::to_string(g_.size()) + " exceeds n = " +
                              std::to_string(n) + "; X_G^T X_G cannot be positive definite");
  }
  std::vector<bool> in_g(static_cast<std::size_t>(p), false);
  for (Index j : g_) {
    if (j < 0 || j >= p) throw DimensionError("G index " + std::to_string(j) + " out of range");
    if (in_g[static_cast<std::size_t>(j)]) {
      throw DimensionError("G index " + std::to_string(j) + " repeated");
    }
    in_g[static_cast<std::size_t>(j)] = true;
  }
  minus_g_position_.assign(static_cast<std::size_t>(p), -1);
  for (Index j = 0; j < p; ++j) {
    if (!in_g[static_cast<std::size_t>(j)]) {
      minus_g_position_[static_cast<std::size_t>(j)] = static_cast<Index>(minus_g_.size());
      minus_g_.push_back(j);
    }
  }

  scale_ = column_scale_factors(x_raw);
  x_ = x_raw * scale_.asDiagonal();
  x_g_ = x_(Eigen::all, g_);
  x_minus_g_ = x_(Eigen::all, minus_g_);

  const Index k = g_size();
  Eigen::HouseholderQR<Matrix> qr(x_g_);
  q_g_ = qr.householderQ() * Matrix::Identity(n, k);
  r_g_ = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

  const double floor = 1e-10 * std::sqrt(static_cast<double>(n));
  for (Index i = 0; i < k; ++i) {
    if (!(std::abs(r_g_(i, i)) > floor)) {
      throw RankDeficiencyError("X_G is rank deficient at G position " + std::to_string(i) +
                                " (column " + std::to_string(g_[static_cast<std::size_t>(i)]) +
                                ")");
    }
  }

  gram_g_ = x_g_.transpose() * x_g_;
  Matrix r_inv = r_g_.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
  gram_g_inv_ = r_inv * r_inv.transpose();
  gram_g_inv_ = 0.5 * (gram_g_inv_ + gram_g_inv_.transpose()).eval();

  x_tilde_ = x_minus_g_ - q_g_ * (q_g_.transpose() * x_minus_g_);
}

Vector PartitionedDesign::project(const Vector& v) const {
  if (v.size() != n()) throw DimensionError("project: vector length differs from n");
  return q_g_ * (q_g_.transpose() * v);
}

Vector PartitionedDesign::residualize(const Vector& v) const {
  if (v.size() != n()) throw DimensionError("residualize: vector length differs from n");
  return v - q_g_ * (q_g_.transpose() * v);
}

Vector PartitionedDesign::solve_g(const Vector& v) const {
  if (v.size() != n()) throw DimensionError("solve_g: vector length differs from n");
  Vector qtv = q_g_.transpose() * v;
  return r_g_.triangularView<Eigen::Upper>().solve(qtv);
}

Matrix PartitionedDesign::solve_g(const Matrix& v) const {
  if (v.rows() != n()) throw DimensionError("solve_g: row count differs from n");
  Matrix qtv = q_g_.transpose() * v;
  return r_g_.triangularView<Eigen::Upper>().solve(qtv);
}

const Matrix& PartitionedDesign::theta() const {
  std::call_once(theta_cache_->once, [this] { theta_cache_->value = solve_g(x_minus_g_); });
  return theta_cache_->value;
}

Index PartitionedDesign::position_in_minus_g(Index j) const {
  if (j < 0 || j >= p()) throw DimensionError("column index out of range");
  return minus_g_position_[static_cast<std::size_t>(j)];
}

PartitionedCovariance partitioned_covariance(const PartitionedDesign& design) {
  const double n = static_cast<double>(design.n());
  PartitionedCovariance cov;
  cov.g_g = design.gram_g() / n;
  cov.g_minus_g = design.x_g().transpose() * design.x_minus_g() / n;
  cov.minus_g_g = cov.g_minus_g.transpose();
  cov.minus_g_minus_g = design.x_minus_g().transpose() * design.x_minus_g() / n;
  // Sigma_{G,G}^{-1} = n (X_G^T X_G)^{-1}
  const Matrix gg_inv = design.gram_g_inverse() * n;
  cov.sigma_tilde = cov.minus_g_minus_g - cov.minus_g_g * gg_inv * cov.g_minus_g;
  cov.sigma_tilde = 0.5 * (cov.sigma_tilde + cov.sigma_tilde.transpose()).eval();
  return cov;
}

double inf_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace partlasso
