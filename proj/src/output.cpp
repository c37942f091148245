#include "partlasso/output.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "partlasso/csv.hpp"

namespace partlasso {

using Json = nlohmann::ordered_json;

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string num(double v) { return csv::format_number(v); }
std::string flag(bool b) { return b ? "1" : "0"; }

void write_meta_comment(std::ostream& out, const OutputMeta& meta) {
  out << "# config_hash=" << meta.config_hash << " base_seed=" << meta.base_seed << '\n';
}

Json meta_json(const OutputMeta& meta) {
  return Json{{"config_hash", meta.config_hash}, {"base_seed", meta.base_seed}};
}

Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) rows.push_back(to_json(Vector(m.row(i).transpose())));
  return rows;
}

Json to_json(const IndexSet& s) {
  Json arr = Json::array();
  for (Index j : s) arr.push_back(j);
  return arr;
}

Json to_json(const std::vector<bool>& v) {
  Json arr = Json::array();
  for (bool b : v) arr.push_back(b);
  return arr;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

void write_csv_table(const std::string& path, const OutputMeta& meta,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out = open_output(path);
  write_meta_comment(out, meta);
  csv::write_row(out, header);
  for (const auto& row : rows) csv::write_row(out, row);
  finish(out, path);
}

void write_json(const std::string& path, const Json& doc) {
  std::ofstream out = open_output(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

std::string suffix(const std::string& name, Index g) { return name + "_" + std::to_string(g); }

}  // namespace

void write_summary(const MonteCarloSummary& s, OutputFormat format, const std::string& path,
                   const OutputMeta& meta) {
  if (format == OutputFormat::json) {
    Json doc;
    doc["meta"] = meta_json(meta);
    doc["replicates"] = s.replicates;
    doc["failures"] = s.failures;
    doc["failed"] = s.failed;
    doc["seed_first"] = s.seed_first;
    doc["seed_last"] = s.seed_last;
    doc["g"] = to_json(s.g);
    doc["lambda"] = s.lambda;
    doc["phi0"] = s.phi0;
    doc["phi0_certified"] = s.phi0_certified;
    doc["prob_floor"] = s.prob_floor;
    doc["theta_inf_norm"] = s.theta_inf_norm;
    doc["coverage_per_coord"] = to_json(s.coverage_per_coord);
    doc["ellipsoid_coverage"] = s.ellipsoid_coverage;
    doc["omega0_frequency"] = s.omega0_frequency;
    doc["theorem1_violation_rate_given_omega0"] = s.theorem1_violation_rate_given_omega0;
    doc["chain_violation_rate"] = s.chain_violation_rate;
    doc["mean_delta_inf"] = s.mean_delta_inf;
    doc["mean_interval_width"] = to_json(s.mean_interval_width);
    doc["ks_statistic"] = to_json(s.ks_statistic);
    doc["ks_pvalue"] = to_json(s.ks_pvalue);
    doc["nonconverged_rate"] = s.nonconverged_rate;
    doc["has_debias"] = s.has_debias;
    doc["debias_coverage"] = to_json(s.debias_coverage);
    doc["debias_term_correlation"] = to_json(s.debias_term_correlation);
    doc["r_inf_norm"] = s.r_inf_norm;
    write_json(path, doc);
    return;
  }

  std::vector<std::string> header = {"replicates", "failures", "failed", "seed_first", "seed_last",
                                     "lambda", "phi0", "phi0_certified", "prob_floor", "theta_inf_norm",
                                     "ellipsoid_coverage", "omega0_frequency",
                                     "theorem1_violation_rate_given_omega0", "chain_violation_rate",
                                     "mean_delta_inf", "nonconverged_rate", "has_debias", "r_inf_norm"};
  std::vector<std::string> row = {std::to_string(s.replicates), std::to_string(s.failures), flag(s.failed),
                                  std::to_string(s.seed_first), std::to_string(s.seed_last),
                                  num(s.lambda), num(s.phi0), flag(s.phi0_certified), num(s.prob_floor),
                                  num(s.theta_inf_norm), num(s.ellipsoid_coverage),
                                  num(s.omega0_frequency), num(s.theorem1_violation_rate_given_omega0),
                                  num(s.chain_violation_rate), num(s.mean_delta_inf),
                                  num(s.nonconverged_rate), flag(s.has_debias), num(s.r_inf_norm)};
  for (std::size_t i = 0; i < s.g.size(); ++i) {
    const Index j = static_cast<Index>(i);
    const Index g = s.g[i];
    header.push_back(suffix("coverage", g));
    row.push_back(num(s.coverage_per_coord(j)));
    header.push_back(suffix("mean_interval_width", g));
    row.push_back(num(s.mean_interval_width(j)));
    header.push_back(suffix("ks_statistic", g));
    row.push_back(num(s.ks_statistic(j)));
    header.push_back(suffix("ks_pvalue", g));
    row.push_back(num(s.ks_pvalue(j)));
    if (s.has_debias) {
      header.push_back(suffix("debias_coverage", g));
      row.push_back(num(s.debias_coverage(j)));
      header.push_back(suffix("debias_term_correlation", g));
      row.push_back(num(s.debias_term_correlation(j)));
    }
  }
  write_csv_table(path, meta, header, {row});
}

MonteCarloSummary read_summary(const std::string& path, OutputFormat format) {
  MonteCarloSummary s;
  if (format == OutputFormat::json) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    const Json doc = Json::parse(in);
    s.replicates = doc.at("replicates").get<Index>();
    s.failures = doc.at("failures").get<Index>();
    s.failed = doc.at("failed").get<bool>();
    s.seed_first = doc.at("seed_first").get<std::uint64_t>();
    s.seed_last = doc.at("seed_last").get<std::uint64_t>();
    for (const auto& g : doc.at("g")) s.g.push_back(g.get<Index>());
    s.lambda = doc.at("lambda").get<double>();
    s.phi0 = doc.at("phi0").get<double>();
    s.phi0_certified = doc.at("phi0_certified").get<bool>();
    s.prob_floor = doc.at("prob_floor").get<double>();
    s.theta_inf_norm = doc.at("theta_inf_norm").get<double>();
    s.coverage_per_coord = vector_from_json(doc.at("coverage_per_coord"));
    s.ellipsoid_coverage = doc.at("ellipsoid_coverage").get<double>();
    s.omega0_frequency = doc.at("omega0_frequency").get<double>();
    s.theorem1_violation_rate_given_omega0 = doc.at("theorem1_violation_rate_given_omega0").get<double>();
    s.chain_violation_rate = doc.at("chain_violation_rate").get<double>();
    s.mean_delta_inf = doc.at("mean_delta_inf").get<double>();
    s.mean_interval_width = vector_from_json(doc.at("mean_interval_width"));
    s.ks_statistic = vector_from_json(doc.at("ks_statistic"));
    s.ks_pvalue = vector_from_json(doc.at("ks_pvalue"));
    s.nonconverged_rate = doc.at("nonconverged_rate").get<double>();
    s.has_debias = doc.at("has_debias").get<bool>();
    s.debias_coverage = vector_from_json(doc.at("debias_coverage"));
    s.debias_term_correlation = vector_from_json(doc.at("debias_term_correlation"));
    s.r_inf_norm = doc.at("r_inf_norm").get<double>();
    return s;
  }

  const csv::Table t = csv::read_file(path);
  if (t.rows.size() != 1) throw std::runtime_error(path + ": expected exactly one summary row");
  auto get = [&](const std::string& name) { return t.number(0, name); };
  auto get_u64 = [&](const std::string& name) { return std::stoull(t.rows[0].at(t.column(name))); };
  s.replicates = static_cast<Index>(get_u64("replicates"));
  s.failures = static_cast<Index>(get_u64("failures"));
  s.failed = get("failed") != 0.0;
  s.seed_first = get_u64("seed_first");
  s.seed_last = get_u64("seed_last");
  s.lambda = get("lambda");
  s.phi0 = get("phi0");
  s.phi0_certified = get("phi0_certified") != 0.0;
  s.prob_floor = get("prob_floor");
  s.theta_inf_norm = get("theta_inf_norm");
  s.ellipsoid_coverage = get("ellipsoid_coverage");
  s.omega0_frequency = get("omega0_frequency");
  s.theorem1_violation_rate_given_omega0 = get("theorem1_violation_rate_given_omega0");
  s.chain_violation_rate = get("chain_violation_rate");
  s.mean_delta_inf = get("mean_delta_inf");
  s.nonconverged_rate = get("nonconverged_rate");
  s.has_debias = get("has_debias") != 0.0;
  s.r_inf_norm = get("r_inf_norm");
  const std::string prefix = "coverage_";
  for (const auto& h : t.header) {
    if (h.rfind(prefix, 0) == 0) s.g.push_back(std::stol(h.substr(prefix.size())));
  }
  const Index k = static_cast<Index>(s.g.size());
  s.coverage_per_coord.resize(k);
  s.mean_interval_width.resize(k);
  s.ks_statistic.resize(k);
  s.ks_pvalue.resize(k);
  s.debias_coverage.resize(s.has_debias ? k : 0);
  s.debias_term_correlation.resize(s.has_debias ? k : 0);
  for (Index j = 0; j < k; ++j) {
    const Index g = s.g[static_cast<std::size_t>(j)];
    s.coverage_per_coord(j) = get(suffix("coverage", g));
    s.mean_interval_width(j) = get(suffix("mean_interval_width", g));
    s.ks_statistic(j) = get(suffix("ks_statistic", g));
    s.ks_pvalue(j) = get(suffix("ks_pvalue", g));
    if (s.has_debias) {
      s.debias_coverage(j) = get(suffix("debias_coverage", g));
      s.debias_term_correlation(j) = get(suffix("debias_term_correlation", g));
    }
  }
  return s;
}

void write_replicates(const std::vector<ReplicateRecord>& records, const IndexSet& g, bool debias,
                      OutputFormat format, const std::string& path, const OutputMeta& meta) {
  if (format == OutputFormat::json) {
    Json doc;
    doc["meta"] = meta_json(meta);
    doc["g"] = to_json(g);
    Json rows = Json::array();
    for (const auto& r : records) {
      Json row;
      row["seed"] = r.seed;
      row["failed"] = r.failed;
      row["error"] = r.error;
      row["converged"] = r.converged;
      row["kkt_gap"] = r.kkt_gap;
      row["iterations"] = r.iterations;
      row["active_size"] = r.active_size;
      row["omega0"] = r.omega0;
      row["bound_holds"] = r.bound_holds;
      row["lhs"] = r.lhs;
      row["rhs"] = r.rhs;
      row["delta_inf"] = r.delta_inf;
      row["delta_middle"] = r.delta_middle;
      row["corollary_bound"] = r.corollary_bound;
      row["chain_holds"] = r.chain_holds;
      row["beta_g_hat"] = to_json(r.beta_g_hat);
      row["pivot"] = to_json(r.pivot);
      row["covered"] = to_json(r.covered);
      row["ellipsoid_covered"] = r.ellipsoid_covered;
      if (debias) {
        row["b_g"] = to_json(r.b_g);
        row["debias_covered"] = to_json(r.debias_covered);
      }
      rows.push_back(std::move(row));
    }
    doc["records"] = std::move(rows);
    write_json(path, doc);
    return;
  }

  std::vector<std::string> header = {"seed", "failed", "error", "converged", "kkt_gap", "iterations",
                                     "active_size", "omega0", "bound_holds", "lhs", "rhs", "delta_inf",
                                     "delta_middle", "corollary_bound", "chain_holds",
                                     "ellipsoid_covered"};
  for (Index j : g) {
    header.push_back(suffix("covered", j));
    header.push_back(suffix("beta_g_hat", j));
    header.push_back(suffix("pivot", j));
    if (debias) {
      header.push_back(suffix("b_g", j));
      header.push_back(suffix("debias_covered", j));
    }
  }
  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    std::vector<std::string> row = {std::to_string(r.seed), flag(r.failed), r.error};
    if (r.failed) {
      row.resize(header.size());
      rows.push_back(std::move(row));
      continue;
    }
    for (auto v : {flag(r.converged), num(r.kkt_gap), std::to_string(r.iterations),
                   std::to_string(r.active_size), flag(r.omega0), flag(r.bound_holds), num(r.lhs),
                   num(r.rhs), num(r.delta_inf), num(r.delta_middle), num(r.corollary_bound),
                   flag(r.chain_holds), flag(r.ellipsoid_covered)}) {
      row.push_back(v);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Index j = static_cast<Index>(i);
      row.push_back(flag(r.covered[i]));
      row.push_back(num(r.beta_g_hat(j)));
      row.push_back(num(r.pivot(j)));
      if (debias) {
        row.push_back(num(r.b_g(j)));
        row.push_back(flag(r.debias_covered[i]));
      }
    }
    rows.push_back(std::move(row));
  }
  write_csv_table(path, meta, header, rows);
}

void write_partial_fit(const PartialFit& fit, const ConfidenceRegion& region, const IndexSet& g,
                       bool sigma_estimated, OutputFormat format, const std::string& path,
                       const OutputMeta& meta) {
  if (format == OutputFormat::json) {
    Json doc;
    doc["meta"] = meta_json(meta);
    doc["g"] = to_json(g);
    doc["beta_g_hat"] = to_json(fit.beta_g_hat);
    doc["cov"] = to_json(fit.cov);
    doc["sigma"] = fit.sigma;
    doc["sigma_estimated"] = sigma_estimated;
    doc["level"] = region.level;
    doc["lower"] = to_json(region.lower);
    doc["upper"] = to_json(region.upper);
    doc["ellipsoid_radius_sq"] = region.radius_sq;
    Json lf;
    lf["beta"] = to_json(fit.lasso_fit.beta);
    lf["active_set"] = to_json(fit.lasso_fit.active_set);
    lf["gamma"] = to_json(fit.lasso_fit.gamma);
    lf["kkt_gap"] = fit.lasso_fit.kkt_gap;
    lf["lambda"] = fit.lasso_fit.lambda;
    lf["iterations"] = fit.lasso_fit.iterations;
    lf["converged"] = fit.lasso_fit.converged;
    doc["lasso_fit"] = std::move(lf);
    doc["warnings"] = fit.warnings;
    write_json(path, doc);
    return;
  }
  const std::vector<std::string> header = {"index", "estimate", "std_error", "lower", "upper", "level",
                                           "sigma", "sigma_estimated", "lambda", "kkt_gap",
                                           "converged", "active_size"};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Index j = static_cast<Index>(i);
    rows.push_back({std::to_string(g[i]), num(fit.beta_g_hat(j)), num(std::sqrt(fit.cov(j, j))),
                    num(region.lower(j)), num(region.upper(j)), num(region.level), num(fit.sigma),
                    flag(sigma_estimated), num(fit.lasso_fit.lambda), num(fit.lasso_fit.kkt_gap),
                    flag(fit.lasso_fit.converged), std::to_string(fit.lasso_fit.active_set.size())});
  }
  write_csv_table(path, meta, header, rows);
}

void write_debias(const DebiasResult& result, const ConfidenceRegion& region, const IndexSet& g,
                  OutputFormat format, const std::string& path, const OutputMeta& meta) {
  const std::string kind =
      result.delta_bound_kind == DeltaBoundKind::oracle ? "oracle" : "assumption_plugin";
  if (format == OutputFormat::json) {
    Json doc;
    doc["meta"] = meta_json(meta);
    doc["g"] = to_json(g);
    doc["M"] = to_json(result.m);
    doc["b_minus_G"] = to_json(result.b_minus_g);
    doc["b_G"] = to_json(result.b_g);
    doc["R"] = to_json(result.r);
    doc["R_inf_norm"] = result.r_inf_norm;
    doc["delta_bound"] = result.delta_bound;
    doc["delta_bound_kind"] = kind;
    doc["cov"] = to_json(result.cov);
    doc["level"] = region.level;
    doc["lower"] = to_json(region.lower);
    doc["upper"] = to_json(region.upper);
    write_json(path, doc);
    return;
  }
  const std::vector<std::string> header = {"index", "b_G", "std_error", "lower", "upper", "level",
                                           "R_inf_norm", "delta_bound", "delta_bound_kind"};
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Index j = static_cast<Index>(i);
    rows.push_back({std::to_string(g[i]), num(result.b_g(j)), num(std::sqrt(result.cov(j, j))),
                    num(region.lower(j)), num(region.upper(j)), num(region.level),
                    num(result.r_inf_norm), num(result.delta_bound), kind});
  }
  write_csv_table(path, meta, header, rows);
}

void write_theory(const TheoryReport& r, OutputFormat format, const std::string& path,
                  const OutputMeta& meta) {
  if (format == OutputFormat::json) {
    Json doc;
    doc["meta"] = meta_json(meta);
    doc["phi0_lower"] = r.phi0.phi0_lower;
    doc["phi0_upper"] = r.phi0.phi0_upper;
    doc["certified"] = r.phi0.certified;
    doc["method"] = to_string(r.phi0.method);
    doc["n_directions"] = r.phi0.n_directions;
    doc["cone_constant"] = r.phi0.cone_constant;
    doc["worst_direction"] = to_json(r.phi0.worst_direction);
    doc["family_phi0"] = r.family_phi0 ? Json(*r.family_phi0) : Json(nullptr);
    doc["s"] = r.s;
    doc["lambda"] = r.lambda;
    doc["prob_floor"] = r.prob_floor;
    doc["theta_inf_norm"] = r.theta_inf_norm;
    doc["corollary_bound"] = r.corollary_bound;
    write_json(path, doc);
    return;
  }
  const std::vector<std::string> header = {"phi0_lower", "phi0_upper", "certified", "method",
                                           "n_directions", "cone_constant", "family_phi0", "s",
                                           "lambda", "prob_floor", "theta_inf_norm",
                                           "corollary_bound"};
  const std::vector<std::string> row = {
      num(r.phi0.phi0_lower), num(r.phi0.phi0_upper), flag(r.phi0.certified),
      to_string(r.phi0.method), std::to_string(r.phi0.n_directions), num(r.phi0.cone_constant),
      r.family_phi0 ? num(*r.family_phi0) : std::string(), std::to_string(r.s), num(r.lambda),
      num(r.prob_floor), num(r.theta_inf_norm), num(r.corollary_bound)};
  write_csv_table(path, meta, header, {row});
}

}  // namespace partlasso
