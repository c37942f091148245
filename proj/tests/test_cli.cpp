#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "partlasso/app.hpp"
#include "partlasso/config.hpp"
#include "partlasso/csv.hpp"
#include "partlasso/output.hpp"

using namespace partlasso;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("partlasso_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kMinimal =
    "# minimal simulation\n"
    "mode = simulate\n"
    "design.family = orthogonal\n"
    "design.n = 60\n"
    "design.p = 20\n"
    "G = 0, 1\n"
    "replicates = 1\n";

}  // namespace

TEST_CASE("key-value parsing, comments and last-one-wins") {
  const KeyValues kv = parse_key_values("# c\n a = 1 \n\nb=x # trailing\na = 2\n");
  CHECK(kv.at("a") == "2");
  CHECK(kv.at("b") == "x");
  CHECK_THROWS_AS(parse_key_values("just words\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_key_values("= 3\n"), ConfigParseError);

  KeyValues base = kv;
  apply_overrides(base, {"a=5", "c = 7", "a=6"});
  CHECK(base.at("a") == "6");
  CHECK(base.at("c") == "7");
  CHECK_THROWS_AS(apply_overrides(base, {"novalue"}), ConfigParseError);
}

TEST_CASE("config conversion and validation") {
  const ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.mode == Mode::simulate);
  CHECK(c.sim.design.g == IndexSet{0, 1});
  CHECK(c.sim.design.n == 60);
  CHECK(c.sim.replicates == 1);

  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigValidationError& e) {
      return e.field();
    }
    return std::string();
  };
  const std::string base = kMinimal;
  CHECK(field_of(base + "G =\n") == "G");
  CHECK(field_of(base + "G = 0, 20\n") == "G");
  CHECK(field_of(base + "A = -1\n") == "A");
  CHECK(field_of(base + "level = 1.5\n") == "level");
  CHECK(field_of(base + "design.family = cube\n") == "design.family");
  CHECK(field_of(base + "design.n = abc\n") == "design.n");
  CHECK(field_of(base + "no.such.key = 1\n") == "no.such.key");
  CHECK(field_of(base + "mode = fit\n") == "data.x");
}

TEST_CASE("config round-trip through the canonical text") {
  ExperimentConfig c = parse_config(std::string(kMinimal) +
                                    "design.family = gaussian_ar1\ndesign.rho = 0.3\nphi0 = 0.125\n"
                                    "beta0.placement = spread\ndebias = true\noutput.format = json\n"
                                    "sigma = 0.1\nlasso.tol = 1e-9\n");
  const ExperimentConfig back = parse_config(serialize_config(c));
  CHECK(back == c);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  c.sim.base_seed += 1;
  CHECK(config_hash(back) != config_hash(c));

  const ExperimentConfig def = parse_config(serialize_config(ExperimentConfig{}));
  CHECK(def == ExperimentConfig{});
}

TEST_CASE("run: minimal simulate config writes a summary with metadata") {
  TempDir dir("minimal");
  const std::string cfg = write_text(dir.file("c.txt"), kMinimal);
  std::ostringstream log;
  CHECK(run(cfg, {"output.path=" + dir.path.string()}, log) == exit_ok);
  const std::string summary = dir.file("summary.csv");
  REQUIRE(fs::exists(summary));
  const auto table = csv::read_file(summary);
  REQUIRE(table.comments.size() == 1);
  const ExperimentConfig used = load_config(cfg, {"output.path=" + dir.path.string()});
  CHECK(table.comments[0].find("config_hash=" + config_hash(used)) != std::string::npos);
  CHECK(table.comments[0].find("base_seed=1") != std::string::npos);
  CHECK(table.rows.size() == 1);
  for (const char* col : {"coverage_0", "coverage_1", "ks_pvalue_0", "omega0_frequency"}) {
    CHECK_NOTHROW(table.column(col));
  }

  const auto reps = csv::read_file(dir.file("replicates.csv"));
  for (const char* col : {"seed", "omega0", "bound_holds", "lhs", "rhs", "delta_inf", "covered_0", "covered_1"}) {
    CHECK_NOTHROW(reps.column(col));
  }
  CHECK(reps.rows.size() == 1);
}

TEST_CASE("run: exit statuses") {
  TempDir dir("status");
  std::ostringstream log;
  const std::string cfg = write_text(dir.file("c.txt"), kMinimal);
  const std::string out = "output.path=" + dir.path.string();

  CHECK(run(cfg, {out, "G="}, log) == exit_validation_error);
  CHECK(log.str().find("G") != std::string::npos);
  CHECK(run(dir.file("missing.txt"), {}, log) == exit_parse_error);
  CHECK(run(write_text(dir.file("bad.txt"), "mode simulate\n"), {}, log) == exit_parse_error);
  CHECK(run(cfg, {out, "bogus"}, log) == exit_parse_error);
  CHECK(run(cfg, {out, "mode=fit", "data.x=" + dir.file("nope.csv"), "data.y=" + dir.file("nope.csv")}, log) ==
        exit_runtime_failure);
}

TEST_CASE("run: output directory falls back to the environment") {
  TempDir dir("env");
  const std::string cfg = write_text(dir.file("c.txt"), kMinimal);
  ::setenv("PARTLASSO_OUTPUT_DIR", dir.file("out").c_str(), 1);
  std::ostringstream log;
  CHECK(run(cfg, {}, log) == exit_ok);
  ::unsetenv("PARTLASSO_OUTPUT_DIR");
  CHECK(fs::exists(dir.file("out/summary.csv")));
}

TEST_CASE("summary round-trip in both formats") {
  TempDir dir("roundtrip");
  const ExperimentConfig c = parse_config(std::string(kMinimal) + "replicates = 30\ndebias = true\n");
  const auto result = run_monte_carlo(c.sim);
  const OutputMeta meta{config_hash(c), c.sim.base_seed};
  for (OutputFormat f : {OutputFormat::csv, OutputFormat::json}) {
    const std::string path = dir.file(f == OutputFormat::csv ? "s.csv" : "s.json");
    write_summary(result.summary, f, path, meta);
    const MonteCarloSummary back = read_summary(path, f);
    const auto& s = result.summary;
    CHECK(back.replicates == s.replicates);
    CHECK(back.g == s.g);
    CHECK(back.has_debias);
    CHECK(std::abs(back.lambda - s.lambda) <= 1e-12);
    CHECK(std::abs(back.omega0_frequency - s.omega0_frequency) <= 1e-12);
    CHECK((back.coverage_per_coord - s.coverage_per_coord).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((back.ks_pvalue - s.ks_pvalue).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((back.debias_term_correlation - s.debias_term_correlation).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const auto doc = nlohmann::json::parse(slurp(dir.file("s.json")));
  CHECK(doc.at("meta").at("config_hash") == meta.config_hash);
  CHECK(doc.at("meta").at("base_seed") == 1);
}

TEST_CASE("empty replicate set gives a header-only CSV") {
  TempDir dir("empty");
  const std::string cfg = write_text(dir.file("c.txt"), kMinimal);
  std::ostringstream log;
  CHECK(run(cfg, {"output.path=" + dir.path.string(), "replicates=0"}, log) == exit_ok);
  const auto reps = csv::read_file(dir.file("replicates.csv"));
  CHECK(reps.rows.empty());
  CHECK_FALSE(reps.header.empty());
}

TEST_CASE("reproducible bytes across runs") {
  TempDir dir("bytes");
  const std::string cfg = write_text(dir.file("c.txt"), std::string(kMinimal) + "replicates = 25\ndebias = true\n");
  std::ostringstream log;
  REQUIRE(run(cfg, {"output.path=" + dir.file("a")}, log) == exit_ok);
  REQUIRE(run(cfg, {"output.path=" + dir.file("b")}, log) == exit_ok);
  // The output path is part of the config, so compare everything after the metadata line.
  auto body = [](const std::string& text) { return text.substr(text.find('\n')); };
  CHECK(body(slurp(dir.file("a/summary.csv"))) == body(slurp(dir.file("b/summary.csv"))));
  CHECK(body(slurp(dir.file("a/replicates.csv"))) == body(slurp(dir.file("b/replicates.csv"))));
}

TEST_CASE("fit mode on CSV data, with de-biasing and plug-in sigma") {
  TempDir dir("fit");
  std::mt19937_64 rng(3);
  const oracle::Mat x = oracle::random_matrix(80, 12, rng);
  oracle::Vec beta = oracle::Vec::Zero(12);
  beta(0) = 1.0;
  beta(3) = 2.0;
  const oracle::Vec y = x * beta + 0.5 * oracle::random_vector(80, rng);
  {
    std::ofstream fx(dir.file("x.csv")), fy(dir.file("y.csv"));
    for (int j = 0; j < 12; ++j) fx << (j ? "," : "") << "x" << j;
    fx << '\n';
    for (int i = 0; i < 80; ++i) {
      for (int j = 0; j < 12; ++j) fx << (j ? "," : "") << csv::format_number(x(i, j));
      fx << '\n';
      fy << csv::format_number(y(i)) << '\n';
    }
  }
  const std::string cfg = write_text(dir.file("c.txt"),
                                     "mode = fit\nG = 0\ndata.x = " + dir.file("x.csv") + "\ndata.y = " +
                                         dir.file("y.csv") + "\nsigma = 0.5\n");
  std::ostringstream log;
  const std::string out = "output.path=" + dir.path.string();
  REQUIRE(run(cfg, {out}, log) == exit_ok);
  const auto pf = csv::read_file(dir.file("partial_fit.csv"));
  REQUIRE(pf.rows.size() == 1);
  CHECK(pf.number(0, "index") == 0);
  CHECK(pf.number(0, "lower") <= pf.number(0, "estimate"));

  CHECK(run(cfg, {out, "debias=true"}, log) == exit_validation_error);
  REQUIRE(run(cfg, {out, "debias=true", "phi0=0.5", "fit.s=2", "sigma.estimate=true", "output.format=json"}, log) ==
          exit_ok);
  const auto d = nlohmann::json::parse(slurp(dir.file("debias.json")));
  CHECK(d.at("delta_bound_kind") == "assumption_plugin");
  CHECK(d.at("M").size() == 11);
  const auto p = nlohmann::json::parse(slurp(dir.file("partial_fit.json")));
  CHECK(p.at("sigma_estimated") == true);
  CHECK(p.at("sigma").get<double>() == doctest::Approx(0.5).epsilon(0.3));
}

TEST_CASE("theory mode reports the certified value for orthogonal designs") {
  TempDir dir("theory");
  const std::string cfg = write_text(dir.file("c.txt"), std::string(kMinimal) + "mode = theory\n");
  std::ostringstream log;
  REQUIRE(run(cfg, {"output.path=" + dir.path.string()}, log) == exit_ok);
  const auto t = csv::read_file(dir.file("theory.csv"));
  CHECK(t.number(0, "phi0_lower") >= 1.0 - 1e-6);
  CHECK(t.number(0, "certified") == 1.0);
  CHECK(t.number(0, "family_phi0") == 1.0);
  CHECK(t.number(0, "s") == 3.0);
}
