#include "affvol/config.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "affvol/errors.hpp"

namespace affvol {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

json value_from_text(const std::string& raw) {
  const std::string v = trim(raw);
  json parsed = json::parse(v, nullptr, false);
  if (parsed.is_discarded()) return json(v);
  return parsed;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double x = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("trailing characters");
  return x;
}

double get_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return to_double(trim(j.get<std::string>()));
  throw std::invalid_argument("expected a number");
}

std::uint64_t get_unsigned(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) {
    const std::string s = trim(j.get<std::string>());
    std::size_t used = 0;
    if (!s.empty() && s[0] != '-') {
      const auto x = std::stoull(s, &used);
      if (used == s.size()) return x;
    }
  }
  throw std::invalid_argument("expected a nonnegative integer");
}

std::string get_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  throw std::invalid_argument("expected a string");
}

bool get_bool(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_string()) {
    const std::string s = trim(j.get<std::string>());
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
  }
  if (j.is_number_integer()) return j.get<long long>() != 0;
  throw std::invalid_argument("expected true or false");
}

std::vector<double> get_doubles(const json& j) {
  std::vector<double> out;
  if (j.is_array()) {
    for (const auto& x : j) out.push_back(get_double(x));
  } else if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_string()) {
    for (const auto& s : split(j.get<std::string>(), ',')) out.push_back(to_double(s));
  } else {
    throw std::invalid_argument("expected a list of numbers");
  }
  return out;
}

cplx get_complex(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {get_double(j[0]), get_double(j[1])};
  if (j.is_string()) return parse_complex(j.get<std::string>());
  throw std::invalid_argument("expected a complex number \"re,im\"");
}

std::vector<std::array<double, 2>> get_pairs(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected [[weight, rate], ...]");
  std::vector<std::array<double, 2>> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("expected [[weight, rate], ...]");
    out.push_back({get_double(p[0]), get_double(p[1])});
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"kernel.type", [](RunConfig& c, const json& j) { c.kernel.type = get_string(j); }},
      {"kernel.alpha", [](RunConfig& c, const json& j) { c.kernel.alpha = get_double(j); }},
      {"kernel.scale", [](RunConfig& c, const json& j) { c.kernel.scale = get_double(j); }},
      {"kernel.atoms", [](RunConfig& c, const json& j) { c.kernel.atoms = get_pairs(j); }},
      {"model.lambda", [](RunConfig& c, const json& j) { c.model.lambda = get_double(j); }},
      {"model.beta", [](RunConfig& c, const json& j) { c.model.beta = get_double(j); }},
      {"model.theta", [](RunConfig& c, const json& j) { c.model.theta = get_double(j); }},
      {"model.alpha0", [](RunConfig& c, const json& j) { c.model.alpha0 = get_double(j); }},
      {"model.a", [](RunConfig& c, const json& j) { c.model.a = get_double(j); }},
      {"model.sigma", [](RunConfig& c, const json& j) { c.model.sigma = get_double(j); }},
      {"model.rho", [](RunConfig& c, const json& j) { c.model.rho = get_double(j); }},
      {"model.V0", [](RunConfig& c, const json& j) { c.model.V0 = get_double(j); }},
      {"model.S0", [](RunConfig& c, const json& j) { c.model.S0 = get_double(j); }},
      {"numerics.n", [](RunConfig& c, const json& j) { c.numerics.n = get_unsigned(j); }},
      {"numerics.tolerance", [](RunConfig& c, const json& j) { c.numerics.tolerance = get_double(j); }},
      {"numerics.max_iterations", [](RunConfig& c, const json& j) { c.numerics.max_iterations = get_unsigned(j); }},
      {"numerics.atoms", [](RunConfig& c, const json& j) { c.numerics.atoms = get_unsigned(j); }},
      {"numerics.atom_counts",
       [](RunConfig& c, const json& j) {
         c.numerics.atom_counts.clear();
         for (double x : get_doubles(j)) {
           if (!(x >= 1.0) || x != std::floor(x)) throw std::invalid_argument("expected positive integers");
           c.numerics.atom_counts.push_back(static_cast<std::size_t>(x));
         }
       }},
      {"numerics.x_max", [](RunConfig& c, const json& j) { c.numerics.x_max = get_double(j); }},
      {"numerics.first_edge", [](RunConfig& c, const json& j) { c.numerics.first_edge = get_double(j); }},
      {"numerics.truncation", [](RunConfig& c, const json& j) { c.numerics.truncation = get_double(j); }},
      {"numerics.step", [](RunConfig& c, const json& j) { c.numerics.step = get_double(j); }},
      {"numerics.tail_tolerance", [](RunConfig& c, const json& j) { c.numerics.tail_tolerance = get_double(j); }},
      {"numerics.threads", [](RunConfig& c, const json& j) { c.numerics.threads = static_cast<unsigned>(get_unsigned(j)); }},
      {"cmd.T", [](RunConfig& c, const json& j) { c.cmd.T = get_double(j); }},
      {"cmd.u", [](RunConfig& c, const json& j) { c.cmd.u = get_complex(j); }},
      {"cmd.v", [](RunConfig& c, const json& j) { c.cmd.v = get_complex(j); }},
      {"cmd.w", [](RunConfig& c, const json& j) { c.cmd.w = get_complex(j); }},
      {"cmd.strikes", [](RunConfig& c, const json& j) { c.cmd.strikes = get_doubles(j); }},
      {"cmd.kind", [](RunConfig& c, const json& j) { c.cmd.kind = get_string(j); }},
      {"cmd.solver", [](RunConfig& c, const json& j) { c.cmd.solver = get_string(j); }},
      {"cmd.scheme", [](RunConfig& c, const json& j) { c.cmd.scheme = get_string(j); }},
      {"cmd.paths", [](RunConfig& c, const json& j) { c.cmd.paths = get_unsigned(j); }},
      {"cmd.steps", [](RunConfig& c, const json& j) { c.cmd.steps = get_unsigned(j); }},
      {"cmd.seed", [](RunConfig& c, const json& j) { c.cmd.seed = get_unsigned(j); }},
      {"cmd.dump_paths", [](RunConfig& c, const json& j) { c.cmd.dump_paths = get_bool(j); }},
  };
  return table;
}

std::map<std::string, json> read_entries(const std::string& text, std::vector<std::string>& problems) {
  std::map<std::string, json> entries;
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      problems.emplace_back("document is not a valid JSON object");
      return entries;
    }
    if (doc.contains("config") && doc["config"].is_object()) doc = doc["config"];
    for (auto it = doc.begin(); it != doc.end(); ++it) entries[it.key()] = it.value();
    return entries;
  }
  std::stringstream ss(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(number) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    if (entries.count(key)) problems.push_back("duplicate key " + key);
    entries[key] = value_from_text(line.substr(eq + 1));
  }
  return entries;
}

void check_choice(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed,
                  std::vector<std::string>& problems) {
  for (const char* a : allowed)
    if (value == a) return;
  std::string msg = key + ": unknown value '" + value + "' (expected";
  for (const char* a : allowed) msg += std::string(" ") + (*a ? a : "\"\"");
  problems.push_back(msg + ")");
}

}  // namespace

std::string format_complex(cplx z) {
  json re = z.real();
  json im = z.imag();
  return re.dump() + "," + im.dump();
}

cplx parse_complex(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() == 1) return {to_double(parts[0]), 0.0};
  if (parts.size() == 2) return {to_double(parts[0]), to_double(parts[1])};
  throw std::invalid_argument("expected \"re,im\"");
}

KernelSpec RunConfig::kernel_spec() const {
  if (kernel.type == "constant") return KernelSpec::constant(kernel.scale);
  if (kernel.type == "power_law") return KernelSpec::power_law(kernel.alpha, kernel.scale);
  if (kernel.type == "exp_sum") {
    RealVector w(static_cast<Eigen::Index>(kernel.atoms.size())), r(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      w[i] = kernel.atoms[static_cast<std::size_t>(i)][0];
      r[i] = kernel.atoms[static_cast<std::size_t>(i)][1];
    }
    return KernelSpec::exponential_sum(w, r);
  }
  throw ArgumentError("unknown kernel type " + kernel.type);
}

ModelParams RunConfig::model_params() const {
  ModelParams m;
  m.lambda = model.lambda;
  m.beta = model.beta ? *model.beta : (model.theta ? model.lambda * *model.theta : 0.0);
  m.alpha0 = model.alpha0;
  if (model.sigma) {
    m.sigma = *model.sigma;
    m.a = m.sigma * m.sigma;
  } else if (model.a) {
    m.a = *model.a;
    m.sigma = std::sqrt(std::max(m.a, 0.0));
  }
  m.rho = model.rho;
  m.V0 = model.V0;
  m.L0 = std::log(model.S0);
  return m;
}

Atoms RunConfig::atoms(std::size_t n) const {
  return discretize_measure(measure_of(kernel_spec()), n, numerics.x_max, MeasureGridOptions{numerics.first_edge});
}

RiccatiOptions RunConfig::riccati_options() const {
  RiccatiOptions o;
  o.tolerance = numerics.tolerance;
  o.max_iterations = numerics.max_iterations;
  return o;
}

InversionGrid RunConfig::inversion_grid() const {
  InversionGrid g;
  g.truncation = numerics.truncation;
  g.step = numerics.step;
  g.time_steps = numerics.n;
  g.tail_tolerance = numerics.tail_tolerance;
  g.threads = numerics.threads;
  return g;
}

RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
  std::vector<std::string> problems;
  std::map<std::string, json> entries = read_entries(text, problems);
  for (const auto& [key, value] : overrides) entries[key] = value_from_text(value);

  RunConfig cfg;
  std::vector<std::string> unknown;
  for (const auto& [key, value] : entries) {
    const auto it = setters().find(key);
    if (it == setters().end()) {
      unknown.push_back(key);
      continue;
    }
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      problems.push_back(key + ": " + e.what());
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown keys:";
    for (const auto& k : unknown) msg += " " + k;
    problems.push_back(msg);
  }

  check_choice("kernel.type", cfg.kernel.type, {"constant", "power_law", "exp_sum"}, problems);
  if (cfg.kernel.type == "exp_sum" && cfg.kernel.atoms.empty())
    problems.emplace_back("kernel.atoms must list at least one [weight, rate] pair");
  try {
    (void)cfg.kernel_spec();
  } catch (const std::exception& e) {
    problems.push_back(std::string("kernel: ") + e.what());
  }

  const ModelConfig& mc = cfg.model;
  if (mc.lambda > 0.0 && mc.beta.has_value() == mc.theta.has_value())
    problems.emplace_back("exactly one of model.beta, model.theta is required when model.lambda > 0");
  if (mc.lambda <= 0.0 && mc.theta)
    problems.emplace_back("model.theta requires model.lambda > 0 (give model.beta instead)");
  if (mc.a && mc.sigma && std::abs(*mc.sigma * *mc.sigma - *mc.a) > 1e-12 * std::max(1.0, std::abs(*mc.a)))
    problems.emplace_back("model.a and model.sigma are inconsistent (need a = sigma^2)");
  if (!(mc.S0 > 0.0)) problems.emplace_back("model.S0 must be positive");
  else
    for (const auto& p : cfg.model_params().problems()) problems.push_back("model: " + p);

  const NumericsConfig& nc = cfg.numerics;
  if (nc.n < 2) problems.emplace_back("numerics.n must be at least 2");
  if (!(nc.tolerance > 0.0)) problems.emplace_back("numerics.tolerance must be positive");
  if (nc.max_iterations == 0) problems.emplace_back("numerics.max_iterations must be positive");
  if (nc.atoms == 0) problems.emplace_back("numerics.atoms must be positive");
  if (nc.atom_counts.empty()) problems.emplace_back("numerics.atom_counts must be nonempty");
  if (!(nc.x_max > nc.first_edge && nc.first_edge > 0.0))
    problems.emplace_back("numerics.first_edge and numerics.x_max need 0 < first_edge < x_max");
  if (!(nc.step > 0.0 && nc.truncation > nc.step))
    problems.emplace_back("numerics.step and numerics.truncation need 0 < step < truncation");
  if (!(nc.tail_tolerance > 0.0)) problems.emplace_back("numerics.tail_tolerance must be positive");

  const CommandConfig& cc = cfg.cmd;
  if (!(cc.T > 0.0)) problems.emplace_back("cmd.T must be positive");
  for (double k : cc.strikes)
    if (!(k > 0.0)) {
      problems.emplace_back("cmd.strikes must be positive");
      break;
    }
  check_choice("cmd.kind", cc.kind, {"call", "put"}, problems);
  check_choice("cmd.solver", cc.solver, {"", "numeric", "analytic", "volterra", "fractional", "convolution", "lift"},
               problems);
  check_choice("cmd.scheme", cc.scheme, {"volterra", "ou", "lift"}, problems);
  if (cc.paths == 0) problems.emplace_back("cmd.paths must be positive");
  if (cc.steps == 0) problems.emplace_back("cmd.steps must be positive");

  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["kernel.type"] = c.kernel.type;
  j["kernel.alpha"] = c.kernel.alpha;
  j["kernel.scale"] = c.kernel.scale;
  if (c.kernel.type == "exp_sum") j["kernel.atoms"] = c.kernel.atoms;
  j["model.lambda"] = c.model.lambda;
  if (c.model.beta) j["model.beta"] = *c.model.beta;
  if (c.model.theta) j["model.theta"] = *c.model.theta;
  j["model.alpha0"] = c.model.alpha0;
  if (c.model.a) j["model.a"] = *c.model.a;
  if (c.model.sigma) j["model.sigma"] = *c.model.sigma;
  j["model.rho"] = c.model.rho;
  j["model.V0"] = c.model.V0;
  j["model.S0"] = c.model.S0;
  j["numerics.n"] = c.numerics.n;
  j["numerics.tolerance"] = c.numerics.tolerance;
  j["numerics.max_iterations"] = c.numerics.max_iterations;
  j["numerics.atoms"] = c.numerics.atoms;
  j["numerics.atom_counts"] = c.numerics.atom_counts;
  j["numerics.x_max"] = c.numerics.x_max;
  j["numerics.first_edge"] = c.numerics.first_edge;
  j["numerics.truncation"] = c.numerics.truncation;
  j["numerics.step"] = c.numerics.step;
  j["numerics.tail_tolerance"] = c.numerics.tail_tolerance;
  j["numerics.threads"] = c.numerics.threads;
  j["cmd.T"] = c.cmd.T;
  j["cmd.u"] = format_complex(c.cmd.u);
  j["cmd.v"] = format_complex(c.cmd.v);
  j["cmd.w"] = format_complex(c.cmd.w);
  j["cmd.strikes"] = c.cmd.strikes;
  j["cmd.kind"] = c.cmd.kind;
  j["cmd.solver"] = c.cmd.solver;
  j["cmd.scheme"] = c.cmd.scheme;
  j["cmd.paths"] = c.cmd.paths;
  j["cmd.steps"] = c.cmd.steps;
  j["cmd.seed"] = c.cmd.seed;
  j["cmd.dump_paths"] = c.cmd.dump_paths;
  return j;
}

}  // namespace affvol
