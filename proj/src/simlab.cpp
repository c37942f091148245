#include "partlasso/simlab.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

#include "partlasso/debias.hpp"
#include "partlasso/errors.hpp"
#include "partlasso/inference.hpp"
#include "partlasso/rng.hpp"
#include "partlasso/stats.hpp"

namespace partlasso {

std::string to_string(DesignFamily family) {
  switch (family) {
    case DesignFamily::orthogonal: return "orthogonal";
    case DesignFamily::gaussian_iid: return "gaussian_iid";
    case DesignFamily::gaussian_ar1: return "gaussian_ar1";
    case DesignFamily::theta_controlled: return "theta_controlled";
  }
  return "unknown";
}

DesignFamily parse_design_family(const std::string& name) {
  for (auto f : {DesignFamily::orthogonal, DesignFamily::gaussian_iid, DesignFamily::gaussian_ar1,
                 DesignFamily::theta_controlled}) {
    if (name == to_string(f)) return f;
  }
  throw std::invalid_argument("unknown design family '" + name + "'");
}

std::string to_string(Placement placement) {
  return placement == Placement::lowest ? "lowest" : "spread";
}

Placement parse_placement(const std::string& name) {
  if (name == "lowest") return Placement::lowest;
  if (name == "spread") return Placement::spread;
  throw std::invalid_argument("unknown placement '" + name + "'");
}

namespace {

Matrix orthonormal_columns(Engine& engine, Index n, Index p) {
  const Matrix z = gaussian_matrix(engine, n, p);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(n, p);
  // Fix column signs so Q does not depend on Householder conventions.
  const Matrix r = qr.matrixQR();
  for (Index j = 0; j < p; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

IndexSet complement(const IndexSet& g, Index p) {
  std::vector<bool> in_g(static_cast<std::size_t>(p), false);
  for (Index j : g) {
    if (j < 0 || j >= p) throw DimensionError("G index " + std::to_string(j) + " out of range");
    in_g[static_cast<std::size_t>(j)] = true;
  }
  IndexSet out;
  for (Index j = 0; j < p; ++j) {
    if (!in_g[static_cast<std::size_t>(j)]) out.push_back(j);
  }
  return out;
}

double theta_controlled_scale(const DesignSpec& spec) {
  const double m = static_cast<double>(spec.p) - static_cast<double>(spec.g.size());
  const double entry = m > 0 ? spec.tau / m : 0.0;
  return 1.0 - static_cast<double>(spec.g.size()) * entry * entry;
}

}  // namespace

PartitionedDesign generate_design(const DesignSpec& spec, std::uint64_t seed) {
  const Index n = spec.n;
  const Index p = spec.p;
  if (n < 1 || p < 1) throw std::invalid_argument("generate_design: n and p must be positive");
  Engine engine = make_engine(seed, Stream::design);
  Matrix x;
  switch (spec.family) {
    case DesignFamily::orthogonal: {
      if (p > n) throw std::invalid_argument("generate_design: orthogonal design needs p <= n");
      x = std::sqrt(static_cast<double>(n)) * orthonormal_columns(engine, n, p);
      break;
    }
    case DesignFamily::gaussian_iid:
      x = gaussian_matrix(engine, n, p);
      break;
    case DesignFamily::gaussian_ar1: {
      if (!(std::abs(spec.rho) < 1.0)) throw std::invalid_argument("generate_design: |rho| must be < 1");
      const Matrix z = gaussian_matrix(engine, n, p);
      x.resize(n, p);
      const double innov = std::sqrt(1.0 - spec.rho * spec.rho);
      x.col(0) = z.col(0);
      for (Index j = 1; j < p; ++j) x.col(j) = spec.rho * x.col(j - 1) + innov * z.col(j);
      break;
    }
    case DesignFamily::theta_controlled: {
      if (p > n) throw std::invalid_argument("generate_design: theta_controlled design needs p <= n");
      if (!(spec.tau >= 0.0)) throw std::invalid_argument("generate_design: tau must be >= 0");
      const double a_sq = theta_controlled_scale(spec);
      if (!(a_sq > 0.0)) {
        throw std::invalid_argument("generate_design: tau too large; need |G| tau^2 < (p - |G|)^2");
      }
      const IndexSet minus_g = complement(spec.g, p);
      const Index k = static_cast<Index>(spec.g.size());
      const Index m = static_cast<Index>(minus_g.size());
      const double root_n = std::sqrt(static_cast<double>(n));
      const Matrix q = orthonormal_columns(engine, n, p);
      const Matrix x_g = root_n * q.leftCols(k);
      const double entry = m > 0 ? spec.tau / static_cast<double>(m) : 0.0;
      const Vector theta_col = Vector::Constant(k, entry);
      x.resize(n, p);
      x(Eigen::all, spec.g) = x_g;
      const double a = std::sqrt(a_sq);
      for (Index c = 0; c < m; ++c) {
        x.col(minus_g[static_cast<std::size_t>(c)]) = x_g * theta_col + a * root_n * q.col(k + c);
      }
      break;
    }
  }
  return PartitionedDesign(x, spec.g);
}

std::optional<double> certified_phi0(const DesignSpec& spec) {
  switch (spec.family) {
    case DesignFamily::orthogonal: return 1.0;
    case DesignFamily::theta_controlled: return std::sqrt(theta_controlled_scale(spec));
    default: return std::nullopt;
  }
}

Vector make_beta0(const PartitionedDesign& design, const Beta0Spec& spec) {
  const Index m = design.m();
  if (spec.s < 0 || spec.s > m) {
    throw std::invalid_argument("make_beta0: s must lie in [0, p - |G|]");
  }
  Vector beta0 = Vector::Zero(design.p());
  for (Index j : design.g()) beta0(j) = spec.g_value;
  for (Index i = 0; i < spec.s; ++i) {
    const Index pos = spec.placement == Placement::lowest ? i : (i * m) / spec.s;
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    beta0(design.minus_g()[static_cast<std::size_t>(pos)]) = sign * spec.beta_min;
  }
  return beta0;
}

ModelInstance generate_response(std::shared_ptr<const PartitionedDesign> design,
                                const Vector& beta0, double sigma, std::uint64_t seed) {
  if (beta0.size() != design->p()) throw DimensionError("generate_response: beta0 length differs from p");
  if (!(sigma >= 0.0)) throw std::invalid_argument("generate_response: sigma must be >= 0");
  Engine engine = make_engine(seed, Stream::noise);
  ModelInstance inst;
  inst.epsilon = sigma * gaussian_vector(engine, design->n());
  inst.y = design->x() * beta0 + inst.epsilon;
  inst.beta0 = beta0;
  inst.sigma = sigma;
  inst.seed = seed;
  for (Index j = 0; j < beta0.size(); ++j) {
    if (beta0(j) != 0.0) inst.support.push_back(j);
  }
  inst.design = std::move(design);
  return inst;
}

namespace {

void validate(const MonteCarloConfig& c) {
  if (c.replicates < 0) throw std::invalid_argument("replicates must be >= 0");
  if (!(c.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(c.a > 0.0)) throw std::invalid_argument("A must be positive");
  if (!(c.level > 0.0 && c.level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  if (c.phi0 && !(*c.phi0 > 0.0)) throw std::invalid_argument("phi0 must be positive");
}

// Everything that depends only on the design, shared by all replicates.
struct Setup {
  std::shared_ptr<const PartitionedDesign> design;
  Vector beta0;
  double lambda = 0.0;
  double phi0 = 0.0;
  bool phi0_certified = false;
  Matrix cov;  // sigma^2 (X_G^T X_G)^{-1}
  // debias
  Matrix m;
  Matrix debias_cov;
  Matrix theta_m;
  double r_inf_norm = 0.0;
};

Setup prepare(const MonteCarloConfig& c) {
  validate(c);
  Setup s;
  s.design = std::make_shared<const PartitionedDesign>(generate_design(c.design, c.design_seed));
  const PartitionedDesign& d = *s.design;
  s.beta0 = make_beta0(d, c.beta0);
  s.lambda = lambda_rule(c.a, c.sigma, d.n(), d.p());

  if (c.phi0) {
    s.phi0 = *c.phi0;
  } else if (auto cert = certified_phi0(c.design)) {
    s.phi0 = *cert;
    s.phi0_certified = true;
  } else {
    IndexSet support;
    for (Index j : d.minus_g()) {
      if (s.beta0(j) != 0.0) support.push_back(j);
    }
    if (support.empty()) throw std::invalid_argument("phi0 cannot be estimated without signal columns outside G");
    CompatibilityReport rep = estimate_phi0(d, support, c.phi0_options);
    s.phi0 = rep.phi0_lower;
    s.phi0_certified = rep.certified;
    if (!(s.phi0 > 0.0)) throw std::runtime_error("compatibility constant estimate is zero");
  }

  s.cov = c.sigma * c.sigma * d.gram_g_inverse();
  if (c.debias) {
    s.m = choose_m_nodewise(d, default_lambda_node(d, c.a_node));
    const Matrix& xt = d.residualized();
    const double n = static_cast<double>(d.n());
    s.theta_m = d.theta() * s.m;
    s.debias_cov = c.sigma * c.sigma *
                   (d.gram_g_inverse() + s.theta_m * (xt.transpose() * xt) * s.theta_m.transpose() / (n * n));
    s.debias_cov = 0.5 * (s.debias_cov + s.debias_cov.transpose()).eval();
    s.r_inf_norm = remainder_matrix(d, s.m).inf_norm;
  }
  return s;
}

ReplicateRecord run_replicate(const MonteCarloConfig& c, const Setup& s, Index r) {
  ReplicateRecord rec;
  rec.seed = c.base_seed + static_cast<std::uint64_t>(r);
  try {
    const PartitionedDesign& d = *s.design;
    const ModelInstance inst = generate_response(s.design, s.beta0, c.sigma, rec.seed);
    const LassoProblem problem = LassoProblem::residualized(d, inst.y, s.lambda);
    const LassoFit fit = solve(problem, c.lasso);
    rec.converged = fit.converged;
    rec.kkt_gap = fit.kkt_gap;
    rec.iterations = fit.iterations;
    rec.active_size = static_cast<Index>(fit.active_set.size());

    const PartialFit pfit = fit_partial(d, inst.y, fit, c.sigma);
    const ConfidenceRegion region = confidence_region(pfit, c.level);
    const Vector beta0_g = inst.beta0_g();
    rec.beta_g_hat = pfit.beta_g_hat;
    rec.pivot = (pfit.beta_g_hat - beta0_g).cwiseQuotient(pfit.cov.diagonal().cwiseSqrt());
    rec.covered.resize(static_cast<std::size_t>(d.g_size()));
    for (Index j = 0; j < d.g_size(); ++j) {
      rec.covered[static_cast<std::size_t>(j)] = region.interval_contains(j, beta0_g(j));
    }
    rec.ellipsoid_covered = region.ellipsoid_contains(beta0_g);

    const TheoremOneCheck thm = theorem1_check(inst, fit, c.a, s.phi0);
    rec.omega0 = thm.omega0_holds;
    rec.bound_holds = thm.bound_holds;
    rec.lhs = thm.lhs;
    rec.rhs = thm.rhs;

    const DeltaDiagnostic delta = delta_diagnostic(d, fit, inst.beta0_minus_g());
    rec.delta_inf = delta.delta_inf;
    rec.delta_middle = delta.bound;
    if (thm.s >= 1) {
      const CorollaryChain chain = corollary_chain(inst, fit, c.a, s.phi0);
      rec.corollary_bound = chain.bound;
      rec.chain_holds = chain.first_link &&
                        (!(chain.omega0_holds && chain.theorem_holds) || chain.second_link);
    } else {
      rec.chain_holds = delta.delta_inf <= delta.bound * (1.0 + 1e-12);
    }

    if (c.debias) {
      const Vector b_minus_g = debias_minus_g(d, inst.y, fit, s.m);
      rec.b_g = debias_g(d, inst.y, b_minus_g);
      const ConfidenceRegion dreg = confidence_region(rec.b_g, s.debias_cov, c.level);
      rec.debias_covered.resize(static_cast<std::size_t>(d.g_size()));
      for (Index j = 0; j < d.g_size(); ++j) {
        rec.debias_covered[static_cast<std::size_t>(j)] = dreg.interval_contains(j, beta0_g(j));
      }
      rec.gaussian_term = d.solve_g(inst.epsilon);
      rec.nodewise_term =
          s.theta_m * (d.residualized().transpose() * inst.epsilon) / static_cast<double>(d.n());
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t k = x.size();
  if (k < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

MonteCarloSummary aggregate(const MonteCarloConfig& c, const Setup& s,
                            const std::vector<ReplicateRecord>& records) {
  const PartitionedDesign& d = *s.design;
  const Index k = d.g_size();
  MonteCarloSummary sum;
  sum.replicates = c.replicates;
  sum.seed_first = c.base_seed;
  sum.seed_last = c.replicates > 0 ? c.base_seed + static_cast<std::uint64_t>(c.replicates - 1) : c.base_seed;
  sum.g = d.g();
  sum.lambda = s.lambda;
  sum.phi0 = s.phi0;
  sum.phi0_certified = s.phi0_certified;
  sum.prob_floor = prob_floor(c.a, d.p());
  sum.theta_inf_norm = inf_norm(d.theta());
  sum.has_debias = c.debias;
  sum.r_inf_norm = s.r_inf_norm;

  sum.coverage_per_coord = Vector::Zero(k);
  sum.mean_interval_width = 2.0 * stats::normal_quantile(0.5 * (1.0 + c.level)) *
                            s.cov.diagonal().cwiseSqrt();
  sum.ks_statistic = Vector::Zero(k);
  sum.ks_pvalue = Vector::Ones(k);
  sum.debias_coverage = Vector::Zero(c.debias ? k : 0);
  sum.debias_term_correlation = Vector::Zero(c.debias ? k : 0);

  Index ok = 0, omega = 0, violations = 0, chain_bad = 0, ellipsoid = 0, nonconv = 0;
  double delta_total = 0.0;
  std::vector<std::vector<double>> pivots(static_cast<std::size_t>(k));
  std::vector<std::vector<double>> t1(static_cast<std::size_t>(k)), t2(static_cast<std::size_t>(k));
  for (const auto& rec : records) {
    if (rec.failed) {
      ++sum.failures;
      continue;
    }
    ++ok;
    if (rec.omega0) {
      ++omega;
      if (!rec.bound_holds) ++violations;
    }
    if (!rec.chain_holds) ++chain_bad;
    if (rec.ellipsoid_covered) ++ellipsoid;
    if (!rec.converged) ++nonconv;
    delta_total += rec.delta_inf;
    for (Index j = 0; j < k; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      if (rec.covered[jj]) sum.coverage_per_coord(j) += 1.0;
      pivots[jj].push_back(rec.pivot(j));
      if (c.debias) {
        if (rec.debias_covered[jj]) sum.debias_coverage(j) += 1.0;
        t1[jj].push_back(rec.gaussian_term(j));
        t2[jj].push_back(rec.nodewise_term(j));
      }
    }
  }
  if (ok > 0) {
    const double okd = static_cast<double>(ok);
    sum.coverage_per_coord /= okd;
    sum.ellipsoid_coverage = static_cast<double>(ellipsoid) / okd;
    sum.omega0_frequency = static_cast<double>(omega) / okd;
    sum.chain_violation_rate = static_cast<double>(chain_bad) / okd;
    sum.mean_delta_inf = delta_total / okd;
    sum.nonconverged_rate = static_cast<double>(nonconv) / okd;
    if (c.debias) sum.debias_coverage /= okd;
    for (Index j = 0; j < k; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      sum.ks_statistic(j) = stats::ks_statistic_normal(pivots[jj]);
      sum.ks_pvalue(j) = stats::ks_pvalue(sum.ks_statistic(j), pivots[jj].size());
      if (c.debias) sum.debias_term_correlation(j) = correlation(t1[jj], t2[jj]);
    }
  }
  sum.theorem1_violation_rate_given_omega0 =
      omega > 0 ? static_cast<double>(violations) / static_cast<double>(omega) : 0.0;
  sum.failed = c.replicates > 0 &&
               static_cast<double>(sum.failures) / static_cast<double>(c.replicates) > c.max_failure_rate;
  return sum;
}

}  // namespace

MonteCarloResult run_monte_carlo(const MonteCarloConfig& config) {
  const Setup setup = prepare(config);
  MonteCarloResult result;
  result.records.resize(static_cast<std::size_t>(config.replicates));
#pragma omp parallel for schedule(dynamic)
  for (Index r = 0; r < config.replicates; ++r) {
    result.records[static_cast<std::size_t>(r)] = run_replicate(config, setup, r);
  }
  result.summary = aggregate(config, setup, result.records);
  return result;
}

MonteCarloResult run_monte_carlo_serial(const MonteCarloConfig& config) {
  const Setup setup = prepare(config);
  MonteCarloResult result;
  result.records.reserve(static_cast<std::size_t>(config.replicates));
  for (Index r = 0; r < config.replicates; ++r) {
    result.records.push_back(run_replicate(config, setup, r));
  }
  result.summary = aggregate(config, setup, result.records);
  return result;
}

}  // namespace partlasso
