#include "partlasso/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

#include <boost/random/uniform_01.hpp>

#include "partlasso/errors.hpp"
#include "partlasso/rng.hpp"

namespace partlasso {

namespace {

// Euclidean projection onto {u >= 0, sum u = radius}.
void project_simplex(Eigen::Ref<Vector> u, double radius) {
  const Index k = u.size();
  Vector sorted = u;
  std::sort(sorted.data(), sorted.data() + k, std::greater<>());
  double cumsum = 0.0;
  double shift = 0.0;
  for (Index i = 0; i < k; ++i) {
    cumsum += sorted(i);
    const double t = (cumsum - radius) / static_cast<double>(i + 1);
    if (sorted(i) - t > 0.0) shift = t;
  }
  u = (u.array() - shift).cwiseMax(0.0).matrix();
}

// Euclidean projection onto {||v||_1 <= radius}.
void project_l1_ball(Eigen::Ref<Vector> v, double radius) {
  if (v.lpNorm<1>() <= radius) return;
  Vector mag = v.cwiseAbs();
  project_simplex(mag, radius);
  v = (v.array().sign() * mag.array()).matrix();
}

// min b^T Q b over {sigma_i b_{S_i} >= 0, sum sigma_i b_{S_i} = 1, ||b_N||_1 <= c}.
struct PatternSolution {
  Vector b;
  double value = 0.0;        // attained objective
  double lower_bound = 0.0;  // certified (Frank-Wolfe duality)
};

class ConeProblem {
 public:
  ConeProblem(Matrix q, IndexSet s_pos, IndexSet n_pos, double cone)
      : q_(std::move(q)), s_pos_(std::move(s_pos)), n_pos_(std::move(n_pos)), cone_(cone) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q_, Eigen::EigenvaluesOnly);
    lipschitz_ = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 0.0);
  }

  Index s() const { return static_cast<Index>(s_pos_.size()); }
  const Matrix& q() const { return q_; }
  const IndexSet& s_pos() const { return s_pos_; }
  const IndexSet& n_pos() const { return n_pos_; }
  double cone() const { return cone_; }

  void project(Vector& b, const Vector& signs) const {
    Vector u(s());
    for (Index i = 0; i < s(); ++i) u(i) = signs(i) * b(s_pos_[static_cast<std::size_t>(i)]);
    project_simplex(u, 1.0);
    for (Index i = 0; i < s(); ++i) b(s_pos_[static_cast<std::size_t>(i)]) = signs(i) * u(i);
    if (!n_pos_.empty()) {
      Vector v = b(n_pos_);
      project_l1_ball(v, cone_);
      b(n_pos_) = v;
    }
  }

  double frank_wolfe_bound(const Vector& b, const Vector& grad, double value,
                           const Vector& signs) const {
    double best_s = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < s(); ++i) {
      best_s = std::min(best_s, signs(i) * grad(s_pos_[static_cast<std::size_t>(i)]));
    }
    const double n_term = n_pos_.empty() ? 0.0 : cone_ * grad(n_pos_).lpNorm<Eigen::Infinity>();
    return value - grad.dot(b) + best_s - n_term;
  }

  PatternSolution solve(const Vector& signs, int max_iter, double tol) const {
    const Index m = q_.rows();
    PatternSolution sol;
    Vector x = Vector::Zero(m);
    for (Index i = 0; i < s(); ++i) {
      x(s_pos_[static_cast<std::size_t>(i)]) = signs(i) / static_cast<double>(s());
    }
    auto objective = [&](const Vector& b) { return b.dot(q_ * b); };
    double fx = objective(x);
    sol.b = x;
    sol.value = fx;
    sol.lower_bound = -std::numeric_limits<double>::infinity();
    if (lipschitz_ == 0.0) {
      sol.lower_bound = 0.0;
      return sol;
    }
    const double step = 1.0 / lipschitz_;
    Vector y = x;
    double t = 1.0;
    for (int it = 0; it < max_iter; ++it) {
      Vector x_next = y - step * (2.0 * (q_ * y));
      project(x_next, signs);
      const double f_next = objective(x_next);
      if (f_next > fx) {
        // Restart momentum.
        y = x;
        t = 1.0;
        continue;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_next + ((t - 1.0) / t_next) * (x_next - x);
      x = std::move(x_next);
      fx = f_next;
      t = t_next;

      if (fx < sol.value) {
        sol.value = fx;
        sol.b = x;
      }
      if (it % 10 == 0 || it + 1 == max_iter) {
        const Vector grad = 2.0 * (q_ * x);
        sol.lower_bound = std::max(sol.lower_bound, frank_wolfe_bound(x, grad, fx, signs));
        if (sol.value - sol.lower_bound <= tol * std::max(1.0, sol.value)) break;
      }
    }
    const Vector grad = 2.0 * (q_ * sol.b);
    sol.lower_bound =
        std::max(sol.lower_bound, frank_wolfe_bound(sol.b, grad, sol.value, signs));
    sol.lower_bound = std::max(sol.lower_bound, 0.0);
    return sol;
  }

 private:
  Matrix q_;
  IndexSet s_pos_;
  IndexSet n_pos_;
  double cone_;
  double lipschitz_ = 0.0;
};

Vector signs_from_bits(Index s, std::uint64_t bits) {
  Vector signs(s);
  signs(0) = 1.0;
  for (Index i = 1; i < s; ++i) signs(i) = (i - 1 < 64 && ((bits >> (i - 1)) & 1u)) ? -1.0 : 1.0;
  return signs;
}

}  // namespace

double compatibility_ratio(const PartitionedDesign& design, const IndexSet& support_positions,
                           const Vector& b) {
  const double s = static_cast<double>(support_positions.size());
  const double l1_s = b(support_positions).lpNorm<1>();
  const double quad = (design.residualized() * b).squaredNorm() / static_cast<double>(design.n());
  return std::sqrt(s * quad) / l1_s;
}

std::string to_string(Phi0Method method) {
  switch (method) {
    case Phi0Method::automatic: return "automatic";
    case Phi0Method::exact_small: return "exact_small";
    case Phi0Method::random_cone_search: return "random_cone_search";
  }
  return "unknown";
}

CompatibilityReport estimate_phi0(const PartitionedDesign& design, const IndexSet& support,
                                  const Phi0Options& options) {
  if (support.empty()) throw std::invalid_argument("estimate_phi0: signal set S is empty");
  if (!(options.cone_constant >= 0.0)) throw std::invalid_argument("estimate_phi0: cone constant must be >= 0");
  const Index m = design.m();
  IndexSet s_pos;
  std::vector<bool> in_s(static_cast<std::size_t>(m), false);
  for (Index j : support) {
    const Index pos = design.position_in_minus_g(j);
    if (pos < 0) throw std::invalid_argument("estimate_phi0: S must not intersect G");
    if (in_s[static_cast<std::size_t>(pos)]) throw std::invalid_argument("estimate_phi0: S has repeated indices");
    in_s[static_cast<std::size_t>(pos)] = true;
    s_pos.push_back(pos);
  }
  IndexSet n_pos;
  for (Index k = 0; k < m; ++k) {
    if (!in_s[static_cast<std::size_t>(k)]) n_pos.push_back(k);
  }
  const Index s = static_cast<Index>(s_pos.size());
  const Matrix& xt = design.residualized();
  Matrix q = xt.transpose() * xt / static_cast<double>(design.n());
  ConeProblem cone(std::move(q), s_pos, n_pos, options.cone_constant);

  Phi0Method method = options.method;
  if (method == Phi0Method::automatic) {
    method = (m <= 6 || s <= options.exact_max_s) ? Phi0Method::exact_small
                                                   : Phi0Method::random_cone_search;
  }
  if (method == Phi0Method::exact_small && s > 30) {
    throw std::invalid_argument("estimate_phi0: exact search over 2^(s-1) sign patterns is too large");
  }

  CompatibilityReport report;
  report.method = method;
  report.cone_constant = options.cone_constant;
  const double sd = static_cast<double>(s);

  if (method == Phi0Method::exact_small) {
    const std::uint64_t patterns = std::uint64_t{1} << (s - 1);
    double best = std::numeric_limits<double>::infinity();
    double lower = std::numeric_limits<double>::infinity();
    for (std::uint64_t bits = 0; bits < patterns; ++bits) {
      PatternSolution sol = cone.solve(signs_from_bits(s, bits), options.max_qp_iter, options.qp_tol);
      lower = std::min(lower, sol.lower_bound);
      if (sol.value < best) {
        best = sol.value;
        report.worst_direction = sol.b;
      }
    }
    report.phi0_upper = std::sqrt(sd * std::max(best, 0.0));
    report.phi0_lower = std::sqrt(sd * std::max(lower, 0.0));
    report.certified = true;
    report.n_directions = static_cast<Index>(patterns);
    return report;
  }

  // Random search over the cone, then QP refinement of the best sign patterns.
  Engine engine = make_engine(options.seed, Stream::cone_search);
  boost::random::normal_distribution<double> normal;
  boost::random::uniform_01<double> unif;
  std::multimap<double, std::uint64_t> best_patterns;
  double best = std::numeric_limits<double>::infinity();
  Vector b(m);
  for (Index d = 0; d < options.n_directions; ++d) {
    b.setZero();
    double l1 = 0.0;
    for (Index pos : s_pos) {
      b(pos) = normal(engine);
      l1 += std::abs(b(pos));
    }
    if (l1 == 0.0) continue;
    for (Index pos : s_pos) b(pos) /= l1;
    if (!n_pos.empty()) {
      const double u = unif(engine);
      const double radius = u < 0.25 ? 0.0 : (u < 0.5 ? options.cone_constant
                                                      : options.cone_constant * unif(engine));
      double ln = 0.0;
      for (Index pos : n_pos) {
        b(pos) = normal(engine);
        ln += std::abs(b(pos));
      }
      for (Index pos : n_pos) b(pos) *= ln > 0.0 ? radius / ln : 0.0;
    }
    const double value = b.dot(cone.q() * b);
    if (value < best) {
      best = value;
      report.worst_direction = b;
    }
    // Sign pattern relative to the first S coordinate.
    std::uint64_t bits = 0;
    const double ref = b(s_pos[0]) >= 0.0 ? 1.0 : -1.0;
    for (Index i = 1; i < std::min<Index>(s, 65); ++i) {
      if (ref * b(s_pos[static_cast<std::size_t>(i)]) < 0.0) bits |= std::uint64_t{1} << (i - 1);
    }
    bool seen = false;
    for (const auto& [v, p] : best_patterns) seen = seen || p == bits;
    if (!seen) {
      best_patterns.emplace(value, bits);
      if (static_cast<Index>(best_patterns.size()) > options.refine_patterns) {
        best_patterns.erase(std::prev(best_patterns.end()));
      }
    }
  }
  for (const auto& [value, bits] : best_patterns) {
    PatternSolution sol = cone.solve(signs_from_bits(s, bits), options.max_qp_iter, options.qp_tol);
    if (sol.value < best) {
      best = sol.value;
      report.worst_direction = sol.b;
    }
  }
  report.phi0_upper = std::sqrt(sd * std::max(best, 0.0));
  report.phi0_lower = report.phi0_upper;
  report.certified = false;
  report.n_directions = options.n_directions;
  return report;
}

double prob_floor(double a, Index p) {
  return 1.0 - std::pow(static_cast<double>(p), -(a * a / 8.0 - 1.0));
}

bool omega0_check(const PartitionedDesign& design, const Vector& epsilon, double lambda) {
  if (epsilon.size() != design.n()) throw DimensionError("omega0_check: epsilon length differs from n");
  const double n = static_cast<double>(design.n());
  if (design.m() == 0) return true;
  return (design.residualized().transpose() * epsilon).lpNorm<Eigen::Infinity>() / n <= lambda / 2.0;
}

TheoremOneCheck theorem1_check(const ModelInstance& instance, const LassoFit& fit, double a,
                               double phi0) {
  if (!(phi0 > 0.0)) throw std::invalid_argument("theorem1_check: phi0 must be positive");
  const PartitionedDesign& design = *instance.design;
  if (fit.beta.size() != design.m()) throw DimensionError("theorem1_check: fit does not match design");
  const double expected = lambda_rule(a, instance.sigma, design.n(), design.p());
  if (std::abs(fit.lambda - expected) > 1e-12 * std::max(1.0, expected)) {
    throw std::invalid_argument("theorem1_check: fit was not computed with lambda = A sigma sqrt(log p / n)");
  }
  const double n = static_cast<double>(design.n());
  const double logp = std::log(static_cast<double>(design.p()));
  const Vector d = fit.beta - instance.beta0_minus_g();

  TheoremOneCheck out;
  out.lambda = fit.lambda;
  out.s = static_cast<Index>(instance.support_minus_g().size());
  out.lhs = (design.residualized() * d).squaredNorm() / n + 0.5 * fit.lambda * d.lpNorm<1>();
  out.rhs = 3.0 * a * a * instance.sigma * instance.sigma * static_cast<double>(out.s) * logp /
            (n * phi0 * phi0);
  out.bound_holds = out.lhs <= out.rhs;
  out.omega0_holds = omega0_check(design, instance.epsilon, fit.lambda);
  out.prob_floor = prob_floor(a, design.p());
  return out;
}

double corollary_bias_bound(const PartitionedDesign& design, double a, double phi0, Index s,
                            double sigma) {
  if (!(phi0 > 0.0)) throw std::invalid_argument("corollary_bias_bound: phi0 must be positive");
  if (s < 1) throw std::invalid_argument("corollary_bias_bound: s must be at least 1");
  const double logp = std::log(static_cast<double>(design.p()));
  return 6.0 * a * sigma / (phi0 * phi0) * inf_norm(design.theta()) * static_cast<double>(s) *
         std::sqrt(logp);
}

CorollaryChain corollary_chain(const ModelInstance& instance, const LassoFit& fit, double a,
                               double phi0) {
  const PartitionedDesign& design = *instance.design;
  const TheoremOneCheck thm = theorem1_check(instance, fit, a, phi0);
  const Vector d = fit.beta - instance.beta0_minus_g();
  const double root_n = std::sqrt(static_cast<double>(design.n()));

  CorollaryChain out;
  out.delta_inf = design.g_size() ? (root_n * (design.theta() * d)).lpNorm<Eigen::Infinity>() : 0.0;
  out.middle = inf_norm(design.theta()) * root_n * d.lpNorm<1>();
  out.bound = corollary_bias_bound(design, a, phi0, std::max<Index>(thm.s, 1), instance.sigma);
  out.first_link = out.delta_inf <= out.middle * (1.0 + 1e-12);
  out.second_link = out.middle <= out.bound;
  out.omega0_holds = thm.omega0_holds;
  out.theorem_holds = thm.bound_holds;
  return out;
}

}  // namespace partlasso
