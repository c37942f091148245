#include "partlasso/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "partlasso/csv.hpp"

namespace partlasso {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::fit: return "fit";
    case Mode::simulate: return "simulate";
    case Mode::theory: return "theory";
  }
  return "unknown";
}

std::string to_string(OutputFormat format) { return format == OutputFormat::csv ? "csv" : "json"; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigValidationError(key, "expected an integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigValidationError(key, "expected a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigValidationError(key, "expected true/false, got '" + value + "'");
}

IndexSet parse_indices(const std::string& key, const std::string& value) {
  IndexSet out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_integer<Index>(key, item));
  }
  return out;
}

std::string join_indices(const IndexSet& g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(g[i]);
  }
  return out;
}

template <typename F>
auto as_field(const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const ConfigValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigValidationError(key, e.what());
  }
}

Phi0Method parse_phi0_method(const std::string& key, const std::string& v) {
  for (auto m : {Phi0Method::automatic, Phi0Method::exact_small, Phi0Method::random_cone_search}) {
    if (v == to_string(m)) return m;
  }
  throw ConfigValidationError(key, "unknown method '" + v + "'");
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  auto num = [](double v) { return csv::format_number(v); };
  static const std::vector<Field> table = {
      {"mode", [](const C& c) { return to_string(c.mode); },
       [](C& c, const std::string& v) {
         if (v == "fit") c.mode = Mode::fit;
         else if (v == "simulate") c.mode = Mode::simulate;
         else if (v == "theory") c.mode = Mode::theory;
         else throw ConfigValidationError("mode", "expected fit, simulate or theory, got '" + v + "'");
       }},
      {"design.family", [](const C& c) { return to_string(c.sim.design.family); },
       [](C& c, const std::string& v) {
         c.sim.design.family = as_field("design.family", [&] { return parse_design_family(v); });
       }},
      {"design.n", [](const C& c) { return std::to_string(c.sim.design.n); },
       [](C& c, const std::string& v) { c.sim.design.n = parse_integer<Index>("design.n", v); }},
      {"design.p", [](const C& c) { return std::to_string(c.sim.design.p); },
       [](C& c, const std::string& v) { c.sim.design.p = parse_integer<Index>("design.p", v); }},
      {"design.rho", [num](const C& c) { return num(c.sim.design.rho); },
       [](C& c, const std::string& v) { c.sim.design.rho = parse_real("design.rho", v); }},
      {"design.tau", [num](const C& c) { return num(c.sim.design.tau); },
       [](C& c, const std::string& v) { c.sim.design.tau = parse_real("design.tau", v); }},
      {"design.seed", [](const C& c) { return std::to_string(c.sim.design_seed); },
       [](C& c, const std::string& v) { c.sim.design_seed = parse_integer<std::uint64_t>("design.seed", v); }},
      {"G", [](const C& c) { return join_indices(c.sim.design.g); },
       [](C& c, const std::string& v) { c.sim.design.g = parse_indices("G", v); }},
      {"beta0.s", [](const C& c) { return std::to_string(c.sim.beta0.s); },
       [](C& c, const std::string& v) { c.sim.beta0.s = parse_integer<Index>("beta0.s", v); }},
      {"beta0.beta_min", [num](const C& c) { return num(c.sim.beta0.beta_min); },
       [](C& c, const std::string& v) { c.sim.beta0.beta_min = parse_real("beta0.beta_min", v); }},
      {"beta0.placement", [](const C& c) { return to_string(c.sim.beta0.placement); },
       [](C& c, const std::string& v) {
         c.sim.beta0.placement = as_field("beta0.placement", [&] { return parse_placement(v); });
       }},
      {"beta0.g_value", [num](const C& c) { return num(c.sim.beta0.g_value); },
       [](C& c, const std::string& v) { c.sim.beta0.g_value = parse_real("beta0.g_value", v); }},
      {"sigma", [num](const C& c) { return num(c.sim.sigma); },
       [](C& c, const std::string& v) { c.sim.sigma = parse_real("sigma", v); }},
      {"sigma.estimate", [](const C& c) { return std::string(c.estimate_sigma ? "true" : "false"); },
       [](C& c, const std::string& v) { c.estimate_sigma = parse_bool("sigma.estimate", v); }},
      {"A", [num](const C& c) { return num(c.sim.a); },
       [](C& c, const std::string& v) { c.sim.a = parse_real("A", v); }},
      {"level", [num](const C& c) { return num(c.sim.level); },
       [](C& c, const std::string& v) { c.sim.level = parse_real("level", v); }},
      {"replicates", [](const C& c) { return std::to_string(c.sim.replicates); },
       [](C& c, const std::string& v) { c.sim.replicates = parse_integer<Index>("replicates", v); }},
      {"base_seed", [](const C& c) { return std::to_string(c.sim.base_seed); },
       [](C& c, const std::string& v) { c.sim.base_seed = parse_integer<std::uint64_t>("base_seed", v); }},
      {"max_failure_rate", [num](const C& c) { return num(c.sim.max_failure_rate); },
       [](C& c, const std::string& v) { c.sim.max_failure_rate = parse_real("max_failure_rate", v); }},
      {"debias", [](const C& c) { return std::string(c.sim.debias ? "true" : "false"); },
       [](C& c, const std::string& v) { c.sim.debias = parse_bool("debias", v); }},
      {"nodewise.A_node", [num](const C& c) { return num(c.sim.a_node); },
       [](C& c, const std::string& v) { c.sim.a_node = parse_real("nodewise.A_node", v); }},
      {"phi0", [num](const C& c) { return c.sim.phi0 ? num(*c.sim.phi0) : std::string("auto"); },
       [](C& c, const std::string& v) {
         if (v == "auto") c.sim.phi0.reset();
         else c.sim.phi0 = parse_real("phi0", v);
       }},
      {"phi0.method", [](const C& c) { return to_string(c.sim.phi0_options.method); },
       [](C& c, const std::string& v) { c.sim.phi0_options.method = parse_phi0_method("phi0.method", v); }},
      {"phi0.n_directions", [](const C& c) { return std::to_string(c.sim.phi0_options.n_directions); },
       [](C& c, const std::string& v) {
         c.sim.phi0_options.n_directions = parse_integer<Index>("phi0.n_directions", v);
       }},
      {"phi0.seed", [](const C& c) { return std::to_string(c.sim.phi0_options.seed); },
       [](C& c, const std::string& v) {
         c.sim.phi0_options.seed = parse_integer<std::uint64_t>("phi0.seed", v);
       }},
      {"phi0.cone_constant", [num](const C& c) { return num(c.sim.phi0_options.cone_constant); },
       [](C& c, const std::string& v) {
         c.sim.phi0_options.cone_constant = parse_real("phi0.cone_constant", v);
       }},
      {"lasso.tol", [num](const C& c) { return num(c.sim.lasso.tol); },
       [](C& c, const std::string& v) { c.sim.lasso.tol = parse_real("lasso.tol", v); }},
      {"lasso.max_iter", [](const C& c) { return std::to_string(c.sim.lasso.max_iter); },
       [](C& c, const std::string& v) { c.sim.lasso.max_iter = parse_integer<int>("lasso.max_iter", v); }},
      {"data.x", [](const C& c) { return c.data_x; }, [](C& c, const std::string& v) { c.data_x = v; }},
      {"data.y", [](const C& c) { return c.data_y; }, [](C& c, const std::string& v) { c.data_y = v; }},
      {"fit.s", [](const C& c) { return std::to_string(c.fit_s); },
       [](C& c, const std::string& v) { c.fit_s = parse_integer<Index>("fit.s", v); }},
      {"output.path", [](const C& c) { return c.output_path; },
       [](C& c, const std::string& v) { c.output_path = v; }},
      {"output.format", [](const C& c) { return to_string(c.format); },
       [](C& c, const std::string& v) {
         if (v == "csv") c.format = OutputFormat::csv;
         else if (v == "json") c.format = OutputFormat::json;
         else throw ConfigValidationError("output.format", "expected csv or json, got '" + v + "'");
       }},
      {"threads", [](const C& c) { return std::to_string(c.threads); },
       [](C& c, const std::string& v) { c.threads = parse_integer<int>("threads", v); }},
  };
  return table;
}

void validate(const ExperimentConfig& c) {
  const auto& s = c.sim;
  const auto& d = s.design;
  if (d.g.empty()) throw ConfigValidationError("G", "must name at least one column");
  if (c.mode != Mode::fit) {
    if (d.n < 1) throw ConfigValidationError("design.n", "must be positive");
    if (d.p < 2) throw ConfigValidationError("design.p", "must be at least 2");
    std::set<Index> seen;
    for (Index j : d.g) {
      if (j < 0 || j >= d.p) throw ConfigValidationError("G", "index " + std::to_string(j) + " outside [0, p)");
      if (!seen.insert(j).second) throw ConfigValidationError("G", "index " + std::to_string(j) + " repeated");
    }
    if (static_cast<Index>(d.g.size()) >= d.p) throw ConfigValidationError("G", "must leave at least one penalized column");
    if (static_cast<Index>(d.g.size()) > d.n) throw ConfigValidationError("G", "|G| must not exceed n");
    if ((d.family == DesignFamily::orthogonal || d.family == DesignFamily::theta_controlled) && d.p > d.n) {
      throw ConfigValidationError("design.p", "this design family needs p <= n");
    }
    if (d.family == DesignFamily::gaussian_ar1 && !(std::abs(d.rho) < 1.0)) {
      throw ConfigValidationError("design.rho", "must satisfy |rho| < 1");
    }
    if (!(d.tau >= 0.0)) throw ConfigValidationError("design.tau", "must be >= 0");
    const Index m = d.p - static_cast<Index>(d.g.size());
    if (s.beta0.s < 0 || s.beta0.s > m) throw ConfigValidationError("beta0.s", "must lie in [0, p - |G|]");
  } else {
    if (c.data_x.empty()) throw ConfigValidationError("data.x", "required in fit mode");
    if (c.data_y.empty()) throw ConfigValidationError("data.y", "required in fit mode");
    if (c.fit_s < 0) throw ConfigValidationError("fit.s", "must be >= 0");
  }
  if (!(c.mode == Mode::fit && c.estimate_sigma) && !(s.sigma > 0.0)) {
    throw ConfigValidationError("sigma", "must be positive");
  }
  if (!(s.a > 0.0)) throw ConfigValidationError("A", "must be positive");
  if (!(s.level > 0.0 && s.level < 1.0)) throw ConfigValidationError("level", "must lie in (0, 1)");
  if (s.replicates < 0) throw ConfigValidationError("replicates", "must be >= 0");
  if (!(s.max_failure_rate >= 0.0 && s.max_failure_rate <= 1.0)) {
    throw ConfigValidationError("max_failure_rate", "must lie in [0, 1]");
  }
  if (!(s.a_node > 0.0)) throw ConfigValidationError("nodewise.A_node", "must be positive");
  if (s.phi0 && !(*s.phi0 > 0.0)) throw ConfigValidationError("phi0", "must be positive or 'auto'");
  if (s.phi0_options.n_directions < 1) throw ConfigValidationError("phi0.n_directions", "must be positive");
  if (!(s.phi0_options.cone_constant >= 0.0)) throw ConfigValidationError("phi0.cone_constant", "must be >= 0");
  if (!(s.lasso.tol > 0.0)) throw ConfigValidationError("lasso.tol", "must be positive");
  if (s.lasso.max_iter < 1) throw ConfigValidationError("lasso.max_iter", "must be positive");
  if (c.threads < 0) throw ConfigValidationError("threads", "must be >= 0");
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigParseError("line " + std::to_string(line_no) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_overrides(KeyValues& base, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigParseError("override '" + o + "' is not key=value");
    const std::string key = trim(o.substr(0, eq));
    if (key.empty()) throw ConfigParseError("override '" + o + "' has an empty key");
    base[key] = trim(o.substr(eq + 1));
  }
}

ExperimentConfig config_from_key_values(const KeyValues& kv) {
  ExperimentConfig c;
  for (const auto& [key, value] : kv) {
    bool known = false;
    for (const auto& f : fields()) {
      if (f.key == key) {
        f.set(c, value);
        known = true;
        break;
      }
    }
    if (!known) throw ConfigValidationError(key, "unknown field");
  }
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  return config_from_key_values(parse_key_values(text));
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  KeyValues kv = parse_key_values(buf.str());
  apply_overrides(kv, overrides);
  return config_from_key_values(kv);
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace partlasso
