#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "affvol/cli.hpp"
#include "affvol/errors.hpp"

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

const std::vector<Flag> kFlags{
    {"--kernel", "kernel.type", "constant | power_law | exp_sum"},
    {"--alpha", "kernel.alpha", "power-law exponent in (1/2, 1]"},
    {"--scale", "kernel.scale", "kernel scale (constant value for the constant kernel)"},
    {"--kernel-atoms", "kernel.atoms", "exp_sum atoms as [[weight, rate], ...]"},
    {"--lambda", "model.lambda", "mean reversion"},
    {"--beta", "model.beta", "drift level"},
    {"--theta", "model.theta", "long-run variance (beta = lambda theta)"},
    {"--alpha0", "model.alpha0", "constant diffusion term (OU class)"},
    {"--a", "model.a", "square-root diffusion coefficient"},
    {"--sigma", "model.sigma", "vol of vol (a = sigma^2)"},
    {"--rho", "model.rho", "correlation"},
    {"--V0", "model.V0", "initial variance"},
    {"--S0", "model.S0", "initial price"},
    {"--n", "numerics.n", "time grid size"},
    {"--atoms", "numerics.atoms", "lift atom count"},
    {"--atom-counts", "numerics.atom_counts", "atom counts for lift-compare"},
    {"--threads", "numerics.threads", "worker threads (0 = all cores)"},
    {"--T", "cmd.T", "horizon"},
    {"--u", "cmd.u", "exponent u as re,im"},
    {"--v", "cmd.v", "exponent v as re,im"},
    {"--w", "cmd.w", "exponent w as re,im"},
    {"--strikes", "cmd.strikes", "strikes, comma separated"},
    {"--kind", "cmd.kind", "call | put"},
    {"--solver", "cmd.solver", "numeric | analytic | volterra | fractional | convolution | lift"},
    {"--scheme", "cmd.scheme", "volterra | ou | lift"},
    {"--paths", "cmd.paths", "Monte Carlo paths"},
    {"--steps", "cmd.steps", "Monte Carlo steps"},
    {"--seed", "cmd.seed", "random seed"},
    {"--dump-paths", "cmd.dump_paths", "write raw V paths instead of summary statistics"},
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw affvol::ArgumentError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine Volterra models: resolvents, Riccati solvers, transforms, pricing and simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;

  const std::map<std::string, std::string> descriptions{
      {"resolvent", "resolvent of lambda K; CSV columns t,R,cumulative_R"},
      {"riccati", "psi on [0, T] (solver volterra | fractional | convolution | lift); CSV columns t,re,im"},
      {"cf", "transform value E[exp(u L_T + v V_T + w int V)]; JSON"},
      {"price", "European prices and implied vols by Fourier inversion; JSON"},
      {"simulate", "Monte Carlo summary (CSV statistic,value) or path dump with --dump-paths (CSV path,t,V)"},
      {"lift-compare", "lift versus Volterra psi errors and terminal moments; JSON"},
  };
  for (const auto& name : affvol::commands()) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->add_option("-c,--config", config_path, "config file (key = value lines or a JSON report)");
    sub->add_option("-o,--out", out_path, "write the artifact to this path instead of stdout");
    sub->add_option("--set", sets, "override key=value (repeatable)");
    for (const auto& f : kFlags) sub->add_option(f.name, values[f.key], f.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? affvol::exit_ok : affvol::exit_validation;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  affvol::RunConfig cfg;
  try {
    std::map<std::string, std::string> overrides;
    for (const auto& [key, value] : values)
      if (!value.empty()) overrides[key] = value;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw affvol::ConfigError({"--set expects key=value, got " + s});
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    const std::string text = config_path.empty() ? std::string() : read_file(config_path);
    cfg = affvol::parse_config(text, overrides);
  } catch (const std::exception& e) {
    std::cerr << affvol::error_record(e);
    return affvol::exit_code_for(e);
  }

  if (out_path.empty()) return affvol::run(command, cfg, std::cout, std::cerr);
  std::ostringstream buffer;
  const int code = affvol::run(command, cfg, buffer, std::cerr);
  if (code == affvol::exit_ok) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << affvol::error_record(affvol::ArgumentError("cannot write " + out_path));
      return affvol::exit_validation;
    }
    out << buffer.str();
  }
  return code;
}
