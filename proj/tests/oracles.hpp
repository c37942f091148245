#pragma once
// Independent reference computations for the tests. Nothing here calls into the
// library's solvers or factorizations: dense explicit inverses, exhaustive
// enumeration and brute-force search only.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Idx = Eigen::Index;

inline Mat explicit_inverse(const Mat& a) { return a.fullPivLu().inverse(); }

inline Mat projection(const Mat& xg) {
  return xg * explicit_inverse(xg.transpose() * xg) * xg.transpose();
}

inline Mat residualized(const Mat& xg, const Mat& xm) {
  const Mat p = projection(xg);
  return (Mat::Identity(xg.rows(), xg.rows()) - p) * xm;
}

inline Mat theta(const Mat& xg, const Mat& xm) {
  return explicit_inverse(xg.transpose() * xg) * xg.transpose() * xm;
}

inline Mat columns(const Mat& x, const std::vector<Idx>& cols) {
  Mat out(x.rows(), static_cast<Idx>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Idx>(k)) = x.col(cols[k]);
  return out;
}

inline double lambda(double a, double sigma, double n, double p) {
  return a * sigma * std::sqrt(std::log(p) / n);
}

inline double lasso_objective(const Mat& x, const Vec& y, double lam, const Vec& b) {
  const double n = static_cast<double>(x.rows());
  return (y - x * b).squaredNorm() / (2.0 * n) + lam * b.lpNorm<1>();
}

struct BruteForceResult {
  Vec beta;
  double objective = std::numeric_limits<double>::infinity();
  bool degenerate = false;  // two distinct feasible patterns tie on the objective
};

/// Exhaustive sign-pattern enumeration for (1/(2n))||y - X b||^2 + lam ||b||_1.
/// For each pattern s in {-1, 0, +1}^m solve X_A^T X_A b_A = X_A^T y - n lam s_A,
/// keep solutions whose signs match and whose inactive coordinates satisfy
/// |x_j^T r| / n <= lam, then take the lowest objective (ties: first pattern in
/// lexicographic order of the base-3 code).
inline BruteForceResult brute_force_lasso(const Mat& x, const Vec& y, double lam) {
  const Idx m = x.cols();
  const double n = static_cast<double>(x.rows());
  BruteForceResult best;
  best.beta = Vec::Zero(m);
  std::int64_t total = 1;
  for (Idx j = 0; j < m; ++j) total *= 3;
  std::vector<int> s(static_cast<std::size_t>(m));
  for (std::int64_t code = 0; code < total; ++code) {
    std::int64_t c = code;
    std::vector<Idx> active;
    for (Idx j = 0; j < m; ++j) {
      s[static_cast<std::size_t>(j)] = static_cast<int>(c % 3) - 1;
      c /= 3;
      if (s[static_cast<std::size_t>(j)] != 0) active.push_back(j);
    }
    Vec b = Vec::Zero(m);
    if (!active.empty()) {
      const Mat xa = columns(x, active);
      const Mat gram = xa.transpose() * xa;
      Eigen::FullPivLU<Mat> lu(gram);
      if (lu.rank() < gram.rows()) continue;
      Vec rhs = xa.transpose() * y;
      for (std::size_t k = 0; k < active.size(); ++k) {
        rhs(static_cast<Idx>(k)) -= n * lam * s[static_cast<std::size_t>(active[k])];
      }
      const Vec ba = lu.solve(rhs);
      bool signs_ok = true;
      for (std::size_t k = 0; k < active.size(); ++k) {
        if (ba(static_cast<Idx>(k)) * s[static_cast<std::size_t>(active[k])] <= 0.0) signs_ok = false;
        b(active[k]) = ba(static_cast<Idx>(k));
      }
      if (!signs_ok) continue;
    }
    const Vec g = x.transpose() * (y - x * b) / n;
    bool feasible = true;
    for (Idx j = 0; j < m; ++j) {
      if (s[static_cast<std::size_t>(j)] == 0 && std::abs(g(j)) > lam * (1.0 + 1e-9) + 1e-12) feasible = false;
    }
    if (!feasible) continue;
    const double obj = lasso_objective(x, y, lam, b);
    if (obj < best.objective - 1e-10) {
      best.beta = b;
      best.objective = obj;
      best.degenerate = false;
    } else if (std::abs(obj - best.objective) <= 1e-10 && (b - best.beta).norm() > 1e-8) {
      best.degenerate = true;
    }
  }
  return best;
}

/// Joint objective (1/(2n))||y - X_G a - X_M b||^2 + lam ||b||_1 minimized by
/// cyclic coordinate descent over all p coordinates on the raw design, with
/// the G coordinates left unpenalized. Works on X directly, never on the
/// projected problem.
inline Vec joint_minimizer(const Mat& x, const Vec& y, const std::vector<bool>& penalized, double lam,
                           int sweeps = 200000, double tol = 1e-14) {
  const Idx p = x.cols();
  const double n = static_cast<double>(x.rows());
  Vec b = Vec::Zero(p);
  Vec r = y;
  for (int it = 0; it < sweeps; ++it) {
    double change = 0.0;
    for (Idx j = 0; j < p; ++j) {
      const double xx = x.col(j).squaredNorm() / n;
      const double z = x.col(j).dot(r) / n + xx * b(j);
      double nb = z / xx;
      if (penalized[static_cast<std::size_t>(j)]) {
        nb = (z > lam ? z - lam : (z < -lam ? z + lam : 0.0)) / xx;
      }
      const double d = nb - b(j);
      if (d != 0.0) {
        r -= d * x.col(j);
        b(j) = nb;
        change = std::max(change, std::abs(d));
      }
    }
    if (change < tol) break;
  }
  return b;
}

/// Brute-force compatibility constant when |S| = 1: b_S = +1 (sign is irrelevant
/// by symmetry) and b_N over a grid of the l1 ball of radius c, refined
/// around the best grid point. Returns min sqrt(||Xt b||^2 / n).
inline double phi0_single_support(const Mat& xt, Idx s_col, double c, int grid = 400) {
  const Idx m = xt.cols();
  const double n = static_cast<double>(xt.rows());
  std::vector<Idx> others;
  for (Idx j = 0; j < m; ++j)
    if (j != s_col) others.push_back(j);
  const Idx k = static_cast<Idx>(others.size());
  auto value = [&](const Vec& bn) {
    Vec b = Vec::Zero(m);
    b(s_col) = 1.0;
    for (Idx i = 0; i < k; ++i) b(others[static_cast<std::size_t>(i)]) = bn(i);
    return std::sqrt((xt * b).squaredNorm() / n);
  };
  if (k == 0) return value(Vec());
  // Coarse grid over the ball (k <= 2 supported), then a shrinking local search.
  Vec best = Vec::Zero(k);
  double best_v = value(best);
  if (k == 1) {
    for (int i = 0; i <= grid; ++i) {
      Vec v(1);
      v(0) = -c + 2.0 * c * i / grid;
      if (double f = value(v); f < best_v) best_v = f, best = v;
    }
  } else if (k == 2) {
    for (int i = 0; i <= grid; ++i)
      for (int j = 0; j <= grid; ++j) {
        Vec v(2);
        v << -c + 2.0 * c * i / grid, -c + 2.0 * c * j / grid;
        if (v.lpNorm<1>() > c) continue;
        if (double f = value(v); f < best_v) best_v = f, best = v;
      }
  }
  double step = 2.0 * c / grid;
  while (step > 1e-10) {
    bool moved = false;
    for (Idx i = 0; i < k; ++i)
      for (double dir : {-1.0, 1.0}) {
        Vec v = best;
        v(i) += dir * step;
        if (v.lpNorm<1>() > c) continue;
        if (double f = value(v); f < best_v) best_v = f, best = v, moved = true;
      }
    if (!moved) step *= 0.5;
  }
  return best_v;
}

/// Kolmogorov distribution tail via its alternating series (valid for x > 0).
inline double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Standard normal CDF via erfc.
inline double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Standard normal quantile by bisection on phi.
inline double normal_quantile(double prob) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline Mat random_matrix(Idx rows, Idx cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Mat a(rows, cols);
  for (Idx j = 0; j < cols; ++j)
    for (Idx i = 0; i < rows; ++i) a(i, j) = z(rng);
  return a;
}

inline Vec random_vector(Idx n, std::mt19937_64& rng) {
  return random_matrix(n, 1, rng).col(0);
}

/// Columns rescaled to Euclidean length sqrt(n).
inline Mat normalized(Mat a) {
  const double target = std::sqrt(static_cast<double>(a.rows()));
  for (Idx j = 0; j < a.cols(); ++j) a.col(j) *= target / a.col(j).norm();
  return a;
}

}  // namespace oracle
