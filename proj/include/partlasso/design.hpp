#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

namespace partlasso {

using Index = Eigen::Index;
using IndexSet = std::vector<Index>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Rescale every column to Euclidean length sqrt(n).
///
/// Throws ZeroColumnError naming the first column that is identically zero.
Matrix normalize_columns(const Matrix& x_raw);

/// Per-column multipliers used by normalize_columns: x_norm_j = scale_j * x_raw_j.
Vector column_scale_factors(const Matrix& x_raw);

/// Design matrix with a distinguished, unpenalized column group G.
///
/// Columns are normalized to length sqrt(n) on construction and the scale
/// factors are kept so coefficients can be mapped back to the raw scale.
/// P_G, the residualized block (I - P_G) X_{-G} and all solves against
/// X_G^T X_G go through a thin Householder QR of X_G.
///
/// Instances are immutable. Theta is computed on first use behind a
/// std::call_once, and copies share that cache, so concurrent readers are safe.
class PartitionedDesign {
 public:
  /// `g` holds 0-based column indices; order is preserved, duplicates are rejected.
  PartitionedDesign(const Matrix& x_raw, IndexSet g);

  Index n() const { return x_.rows(); }
  Index p() const { return x_.cols(); }
  Index g_size() const { return static_cast<Index>(g_.size()); }
  Index m() const { return p() - g_size(); }

  const IndexSet& g() const { return g_; }
  const IndexSet& minus_g() const { return minus_g_; }
  const Matrix& x() const { return x_; }
  const Matrix& x_g() const { return x_g_; }
  const Matrix& x_minus_g() const { return x_minus_g_; }
  const Vector& scale_factors() const { return scale_; }

  /// X_G^T X_G.
  const Matrix& gram_g() const { return gram_g_; }
  /// (X_G^T X_G)^{-1}, assembled from the triangular QR factor.
  const Matrix& gram_g_inverse() const { return gram_g_inv_; }
  /// Orthonormal basis of span(X_G), n x |G|.
  const Matrix& q_g() const { return q_g_; }

  /// (I - P_G) X_{-G}.
  const Matrix& residualized() const { return x_tilde_; }

  /// P_G v.
  Vector project(const Vector& v) const;
  /// (I - P_G) v.
  Vector residualize(const Vector& v) const;
  /// (X_G^T X_G)^{-1} X_G^T v, i.e. the OLS coefficients of v on X_G.
  Vector solve_g(const Vector& v) const;
  /// Column-wise solve_g.
  Matrix solve_g(const Matrix& v) const;

  /// Theta = (X_G^T X_G)^{-1} X_G^T X_{-G}, |G| x (p - |G|).
  const Matrix& theta() const;

  /// Position of original column `j` inside minus_g(), or -1 when j is in G.
  Index position_in_minus_g(Index j) const;

 private:
  struct ThetaCache {
    std::once_flag once;
    Matrix value;
  };

  IndexSet g_;
  IndexSet minus_g_;
  std::vector<Index> minus_g_position_;
  Vector scale_;
  Matrix x_;
  Matrix x_g_;
  Matrix x_minus_g_;
  Matrix q_g_;
  Matrix r_g_;  // upper triangular, |G| x |G|
  Matrix gram_g_;
  Matrix gram_g_inv_;
  Matrix x_tilde_;
  std::shared_ptr<ThetaCache> theta_cache_;
};

/// Blocks of Sigma_hat = X^T X / n under the G / -G split, plus the
/// residual Gram Sigma_tilde = Sigma_{-G,-G} - Sigma_{-G,G} Sigma_{G,G}^{-1} Sigma_{G,-G}.
struct PartitionedCovariance {
  Matrix g_g;
  Matrix g_minus_g;
  Matrix minus_g_g;  // exact transpose of g_minus_g
  Matrix minus_g_minus_g;
  Matrix sigma_tilde;
};

/// Sigma_tilde is formed from the Schur complement of the sample covariance
/// blocks, not from residualized(); the two routes are cross-checked in tests.
PartitionedCovariance partitioned_covariance(const PartitionedDesign& design);

/// ||A||_inf as the maximum absolute row sum.
double inf_norm(const Matrix& a);

/// Load a dense matrix from comma-separated text. A first row that does not
/// parse as numbers is treated as a header and skipped.
Matrix load_matrix_csv(const std::string& path);

}  // namespace partlasso
