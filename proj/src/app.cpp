#include "partlasso/app.hpp"

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <ostream>

#include <omp.h>

#include "partlasso/debias.hpp"
#include "partlasso/errors.hpp"
#include "partlasso/inference.hpp"
#include "partlasso/output.hpp"
#include "partlasso/simlab.hpp"
#include "partlasso/theory.hpp"

namespace partlasso {

namespace fs = std::filesystem;

std::string resolve_output_dir(const ExperimentConfig& config) {
  if (!config.output_path.empty()) return config.output_path;
  if (const char* env = std::getenv("PARTLASSO_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

namespace {

std::string extension(OutputFormat f) { return f == OutputFormat::json ? ".json" : ".csv"; }

std::string out_file(const fs::path& dir, const std::string& stem, OutputFormat f) {
  return (dir / (stem + extension(f))).string();
}

int run_simulate(const ExperimentConfig& c, const fs::path& dir, const OutputMeta& meta,
                 std::ostream& log) {
  const MonteCarloResult result = run_monte_carlo(c.sim);
  const auto& s = result.summary;
  write_summary(s, c.format, out_file(dir, "summary", c.format), meta);
  write_replicates(result.records, s.g, c.sim.debias, c.format, out_file(dir, "replicates", c.format),
                   meta);
  log << "simulate: " << s.replicates << " replicates, " << s.failures << " failed, seeds "
      << s.seed_first << ".." << s.seed_last << '\n';
  if (s.failed) {
    log << "error: replicate failure rate above max_failure_rate=" << c.sim.max_failure_rate << '\n';
    return exit_runtime_failure;
  }
  return exit_ok;
}

int run_fit(const ExperimentConfig& c, const fs::path& dir, const OutputMeta& meta,
            std::ostream& log) {
  if (c.data_x.empty()) throw ConfigValidationError("data.x", "required in fit mode");
  if (c.data_y.empty()) throw ConfigValidationError("data.y", "required in fit mode");
  if (c.sim.debias && (!c.sim.phi0 || c.fit_s < 1)) {
    throw ConfigValidationError(c.sim.phi0 ? "fit.s" : "phi0",
                                "de-biasing real data needs a numeric phi0 and fit.s >= 1");
  }
  const Matrix x = load_matrix_csv(c.data_x);
  const Matrix ym = load_matrix_csv(c.data_y);
  if (ym.cols() != 1) throw DimensionError("data.y must hold a single column");
  if (ym.rows() != x.rows()) throw DimensionError("data.x and data.y have different row counts");
  const Vector y = ym.col(0);

  const PartitionedDesign design(x, c.sim.design.g);
  auto fit_at = [&](double sigma) {
    const auto problem =
        LassoProblem::residualized(design, y, lambda_rule(c.sim.a, sigma, design.n(), design.p()));
    return solve(problem, c.sim.lasso);
  };

  double sigma = c.sim.sigma;
  LassoFit lasso = fit_at(sigma);
  if (c.estimate_sigma) {
    sigma = estimate_sigma(design, y, lasso);
    lasso = fit_at(sigma);
    log << "fit: plug-in sigma " << sigma << " (not covered by the known-sigma theory)\n";
  }
  const PartialFit fit = fit_partial(design, y, lasso, sigma);
  for (const auto& w : fit.warnings) log << "warning: " << w << '\n';
  const ConfidenceRegion region = confidence_region(fit, c.sim.level);
  write_partial_fit(fit, region, design.g(), c.estimate_sigma, c.format,
                    out_file(dir, "partial_fit", c.format), meta);

  if (c.sim.debias) {
    const Matrix m = choose_m_nodewise(design, default_lambda_node(design, c.sim.a_node));
    const PluginAssumptions assumptions{c.sim.a, sigma, static_cast<double>(c.fit_s), *c.sim.phi0};
    const DebiasResult d = debias(design, y, lasso, m, sigma, std::nullopt, assumptions);
    const ConfidenceRegion dregion = confidence_region(d.b_g, d.cov, c.sim.level);
    write_debias(d, dregion, design.g(), c.format, out_file(dir, "debias", c.format), meta);
    log << "fit: de-biased, ||R||_inf = " << d.r_inf_norm
        << ", delta bound (assumption-dependent) = " << d.delta_bound << '\n';
  }
  log << "fit: n=" << design.n() << " p=" << design.p() << " active=" << lasso.active_set.size()
      << " kkt_gap=" << lasso.kkt_gap << '\n';
  return exit_ok;
}

int run_theory(const ExperimentConfig& c, const fs::path& dir, const OutputMeta& meta,
               std::ostream& log) {
  const auto& sim = c.sim;
  const PartitionedDesign design = generate_design(sim.design, sim.design_seed);
  const Vector beta0 = make_beta0(design, sim.beta0);
  IndexSet support;
  for (Index j : design.minus_g()) {
    if (beta0(j) != 0.0) support.push_back(j);
  }

  TheoryReport r;
  r.phi0 = estimate_phi0(design, support, sim.phi0_options);
  r.family_phi0 = certified_phi0(sim.design);
  r.s = static_cast<Index>(support.size());
  r.lambda = lambda_rule(sim.a, sim.sigma, design.n(), design.p());
  r.prob_floor = prob_floor(sim.a, design.p());
  r.theta_inf_norm = inf_norm(design.theta());
  r.corollary_bound = r.phi0.phi0_lower > 0.0
                          ? corollary_bias_bound(design, sim.a, r.phi0.phi0_lower, r.s, sim.sigma)
                          : 0.0;
  write_theory(r, c.format, out_file(dir, "theory", c.format), meta);
  log << "theory: phi0 in [" << r.phi0.phi0_lower << ", " << r.phi0.phi0_upper << "] ("
      << (r.phi0.certified ? "certified" : "heuristic") << ")\n";
  return exit_ok;
}

}  // namespace

int execute(const ExperimentConfig& config, std::ostream& log) {
  if (config.threads > 0) omp_set_num_threads(config.threads);
  const fs::path dir = resolve_output_dir(config);
  fs::create_directories(dir);
  const OutputMeta meta{config_hash(config), config.sim.base_seed};
  switch (config.mode) {
    case Mode::simulate:
      return run_simulate(config, dir, meta, log);
    case Mode::fit:
      return run_fit(config, dir, meta, log);
    case Mode::theory:
      return run_theory(config, dir, meta, log);
  }
  return exit_runtime_failure;
}

int run(const std::string& config_path, const std::vector<std::string>& overrides,
        std::ostream& log) {
  ExperimentConfig config;
  try {
    config = load_config(config_path, overrides);
  } catch (const ConfigParseError& e) {
    log << "parse error: " << e.what() << '\n';
    return exit_parse_error;
  } catch (const ConfigValidationError& e) {
    log << "validation error: " << e.what() << '\n';
    return exit_validation_error;
  }
  try {
    return execute(config, log);
  } catch (const ConfigValidationError& e) {
    log << "validation error: " << e.what() << '\n';
    return exit_validation_error;
  } catch (const std::exception& e) {
    log << "runtime failure: " << e.what() << '\n';
    return exit_runtime_failure;
  }
}

}  // namespace partlasso
