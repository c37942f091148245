#pragma once

#include <cstdint>
#include <string>

#include "partlasso/design.hpp"
#include "partlasso/lasso.hpp"
#include "partlasso/model.hpp"

namespace partlasso {

// Compatibility constant
//
// phi0 is the largest constant with
//
//     ||b_S||_1^2 <= s ||(I - P_G) X_{-G} b||_2^2 / (n phi0^2)
//
// over the cone ||b_N||_1 <= c ||b_S||_1 (c = 3 by default). Fixing
// ||b_S||_1 = 1 and the sign pattern of b_S turns the search into a convex
// quadratic program over (simplex) x (l1 ball), solved by accelerated
// projected gradient. A Frank-Wolfe duality bound gives a certified lower
// bound for each pattern, so enumerating all patterns certifies phi0 from below.

enum class Phi0Method { automatic, exact_small, random_cone_search };

struct Phi0Options {
  Phi0Method method = Phi0Method::automatic;
  /// automatic picks exact_small when p - |G| <= 6 or |S| <= this.
  Index exact_max_s = 10;
  Index n_directions = 100000;
  /// Sign patterns of the best random samples that get refined by the QP.
  Index refine_patterns = 8;
  double cone_constant = 3.0;
  std::uint64_t seed = 1;
  int max_qp_iter = 20000;
  double qp_tol = 1e-12;

  bool operator==(const Phi0Options&) const = default;
};

struct CompatibilityReport {
  /// Certified lower bound in exact_small mode; best value found (heuristic) otherwise.
  double phi0_lower = 0.0;
  /// Smallest ratio attained by an explicit cone direction.
  double phi0_upper = 0.0;
  bool certified = false;
  Phi0Method method = Phi0Method::exact_small;
  /// Argmin direction in minus_g() coordinates, scaled so ||b_S||_1 = 1.
  Vector worst_direction;
  Index n_directions = 0;
  double cone_constant = 3.0;
};

/// `support` holds original column indices, all outside G.
CompatibilityReport estimate_phi0(const PartitionedDesign& design, const IndexSet& support,
                                  const Phi0Options& options = {});

/// sqrt(s ||Xt b||^2 / n) / ||b_S||_1 for a single direction (support in minus_g() positions).
double compatibility_ratio(const PartitionedDesign& design, const IndexSet& support_positions,
                           const Vector& b);

std::string to_string(Phi0Method method);

/// 1 - p^{-(A^2/8 - 1)}.
double prob_floor(double a, Index p);

/// Whether ||X_{-G}^T (I - P_G) epsilon||_inf / n <= lambda / 2.
bool omega0_check(const PartitionedDesign& design, const Vector& epsilon, double lambda);

struct TheoremOneCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double lambda = 0.0;
  Index s = 0;
  bool omega0_holds = false;
  bool bound_holds = false;
  double prob_floor = 0.0;
};

/// Oracle-inequality check for one instance:
///   lhs = (1/n) d^T Xt^T Xt d + (lambda/2) ||d||_1,  d = beta_{-G}_hat - beta0_{-G},
///   rhs = 3 A^2 sigma^2 s log p / (n phi0^2),
/// with s the number of signal columns outside G. The fit must have been computed with
/// lambda = lambda_rule(A, sigma, n, p); throws std::invalid_argument otherwise or if phi0 <= 0.
TheoremOneCheck theorem1_check(const ModelInstance& instance, const LassoFit& fit, double a,
                               double phi0);

/// (6 A sigma / phi0^2) ||Theta||_inf s sqrt(log p). The classical statement omits
/// sigma (it is a constant there); pass sigma = 1 for that form.
double corollary_bias_bound(const PartitionedDesign& design, double a, double phi0, Index s,
                            double sigma = 1.0);

struct CorollaryChain {
  double delta_inf = 0.0;  // ||Delta||_inf
  double middle = 0.0;     // ||Theta||_inf sqrt(n) ||beta_{-G}_hat - beta0_{-G}||_1
  double bound = 0.0;      // corollary_bias_bound
  bool first_link = false;  // delta_inf <= middle
  bool second_link = false;  // middle <= bound
  bool omega0_holds = false;
  bool theorem_holds = false;
};

/// Evaluates all three members of the bias chain on one instance.
CorollaryChain corollary_chain(const ModelInstance& instance, const LassoFit& fit, double a,
                               double phi0);

}  // namespace partlasso
