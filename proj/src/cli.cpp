#include "affvol/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "affvol/errors.hpp"
#include "affvol/montecarlo.hpp"
#include "affvol/resolvent.hpp"

namespace affvol {

using nlohmann::json;

namespace {

std::ostringstream csv_stream() {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  return os;
}

json report(const std::string& command, const RunConfig& cfg) {
  json j;
  j["schema"] = 1;
  j["command"] = command;
  j["config"] = config_to_json(cfg);
  return j;
}

const PowerLaw& require_power_law(const KernelSpec& k, const char* what) {
  const auto* p = std::get_if<PowerLaw>(&k.variant());
  if (p == nullptr) throw ArgumentError(std::string(what) + " requires kernel.type = power_law");
  return *p;
}

ExponentTriple exponent(const RunConfig& cfg) { return {cfg.cmd.u, cfg.cmd.v, cfg.cmd.w}; }

std::string run_resolvent(const RunConfig& cfg) {
  const KernelSpec k = cfg.kernel_spec();
  const ResolventTable tbl = cfg.cmd.solver == "analytic"
                                 ? resolvent_table_analytic(k, cfg.model.lambda, cfg.cmd.T, cfg.numerics.n)
                                 : resolvent_numeric(k, cfg.model.lambda, cfg.cmd.T, cfg.numerics.n);
  auto os = csv_stream();
  os << "t,R,cumulative_R\n";
  for (std::size_t j = 0; j < tbl.grid.points(); ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    os << tbl.grid.time(j) << ',' << tbl.samples[i] << ',' << tbl.cumulative[i] << '\n';
  }
  return os.str();
}

ComplexVector riccati_path(const RunConfig& cfg, std::string& formulation) {
  const KernelSpec k = cfg.kernel_spec();
  const ModelParams m = cfg.model_params();
  const std::string& solver = cfg.cmd.solver.empty() ? std::string("volterra") : cfg.cmd.solver;
  formulation = solver;
  const std::size_t n = cfg.numerics.n;
  if (solver == "volterra") return solve_riccati_volterra(k, m, exponent(cfg), cfg.cmd.T, n, cfg.riccati_options()).psi;
  if (solver == "fractional") {
    const PowerLaw& p = require_power_law(k, "fractional solver");
    if (cfg.cmd.v != cplx(0.0, 0.0) || cfg.cmd.w != cplx(0.0, 0.0))
      throw ArgumentError("fractional solver supports v = w = 0 only");
    return solve_fractional_riccati(p.alpha, m, cfg.cmd.u, cfg.cmd.T, n, cfg.riccati_options(), p.scale).psi;
  }
  if (solver == "convolution") {
    if (cfg.cmd.v != cplx(0.0, 0.0) || cfg.cmd.w != cplx(0.0, 0.0))
      throw ArgumentError("convolution solver supports v = w = 0 only");
    return solve_convolution_riccati(k, m, cfg.cmd.u, cfg.cmd.T, n, cfg.riccati_options()).psi;
  }
  if (solver == "lift") {
    if (cfg.cmd.w != cplx(0.0, 0.0)) throw ArgumentError("lift solver supports w = 0 only");
    const Atoms atoms = cfg.atoms(cfg.numerics.atoms);
    const ComplexVector h = ComplexVector::Constant(static_cast<Eigen::Index>(atoms.size()), cfg.cmd.v);
    return solve_lift_riccati(atoms, m, h, cfg.cmd.T, n, cfg.cmd.u, cfg.riccati_options()).psi_reduced;
  }
  throw ArgumentError("riccati: unknown solver " + solver);
}

std::string run_riccati(const RunConfig& cfg) {
  std::string formulation;
  const ComplexVector psi = riccati_path(cfg, formulation);
  const UniformGrid grid(cfg.cmd.T, cfg.numerics.n);
  auto os = csv_stream();
  os << "t,re,im\n";
  for (std::size_t j = 0; j < grid.points(); ++j) {
    const cplx z = psi[static_cast<Eigen::Index>(j)];
    os << grid.time(j) << ',' << z.real() << ',' << z.imag() << '\n';
  }
  return os.str();
}

TransformValue transform(const RunConfig& cfg) {
  const KernelSpec k = cfg.kernel_spec();
  const ModelParams m = cfg.model_params();
  const std::string& solver = cfg.cmd.solver.empty() ? std::string("volterra") : cfg.cmd.solver;
  if (solver == "volterra") return cf_general(k, m, exponent(cfg), cfg.cmd.T, cfg.numerics.n, cfg.riccati_options());
  if (solver == "fractional") {
    const PowerLaw& p = require_power_law(k, "fractional transform");
    if (p.scale != 1.0) throw ArgumentError("fractional transform requires kernel.scale = 1");
    if (cfg.cmd.v != cplx(0.0, 0.0) || cfg.cmd.w != cplx(0.0, 0.0))
      throw ArgumentError("fractional transform supports v = w = 0 only");
    return cf_rough_heston(p.alpha, m, cfg.cmd.u, cfg.cmd.T, cfg.numerics.n, cfg.riccati_options());
  }
  if (solver == "lift") {
    if (cfg.cmd.u != cplx(0.0, 0.0) || cfg.cmd.w != cplx(0.0, 0.0))
      throw ArgumentError("lift transform supports u = w = 0 only");
    return cf_lift(cfg.atoms(cfg.numerics.atoms), m, cfg.cmd.v, cfg.cmd.T, cfg.numerics.n);
  }
  throw ArgumentError("cf: unsupported solver " + solver);
}

std::string run_cf(const RunConfig& cfg) {
  const TransformValue tv = transform(cfg);
  json j = report("cf", cfg);
  j["result"] = {{"u", format_complex(cfg.cmd.u)},
                 {"v", format_complex(cfg.cmd.v)},
                 {"w", format_complex(cfg.cmd.w)},
                 {"T", cfg.cmd.T},
                 {"value_re", tv.value.real()},
                 {"value_im", tv.value.imag()},
                 {"formulation", tv.formulation},
                 {"warnings", tv.warnings}};
  return j.dump(2) + "\n";
}

std::string run_price(const RunConfig& cfg) {
  const OptionKind kind = cfg.cmd.kind == "put" ? OptionKind::put : OptionKind::call;
  const std::vector<double> prices = price_european(cfg.kernel_spec(), cfg.model_params(), cfg.cmd.strikes, cfg.cmd.T,
                                                    kind, cfg.inversion_grid());
  json rows = json::array();
  for (std::size_t i = 0; i < prices.size(); ++i) {
    json row = {{"strike", cfg.cmd.strikes[i]}, {"T", cfg.cmd.T}, {"kind", cfg.cmd.kind}, {"price", prices[i]}};
    try {
      row["implied_vol"] = implied_vol(prices[i], cfg.model.S0, cfg.cmd.strikes[i], cfg.cmd.T, kind);
    } catch (const DomainError&) {
      row["implied_vol"] = nullptr;
    }
    rows.push_back(row);
  }
  json j = report("price", cfg);
  j["result"] = rows;
  return j.dump(2) + "\n";
}

PathSet simulate(const RunConfig& cfg, const std::string& scheme, std::size_t atoms, bool store_paths) {
  SimulationOptions opts;
  opts.with_price = scheme != "ou";
  opts.store_paths = store_paths;
  opts.threads = cfg.numerics.threads;
  const ModelParams m = cfg.model_params();
  if (scheme == "ou")
    return simulate_volterra_ou(cfg.kernel_spec(), m, cfg.cmd.T, cfg.cmd.steps, cfg.cmd.paths, cfg.cmd.seed, opts);
  if (scheme == "lift")
    return simulate_lift(cfg.atoms(atoms), m, cfg.cmd.T, cfg.cmd.steps, cfg.cmd.paths, cfg.cmd.seed, opts);
  return simulate_volterra(cfg.kernel_spec(), m, cfg.cmd.T, cfg.cmd.steps, cfg.cmd.paths, cfg.cmd.seed, opts);
}

struct Moments {
  double mean, mean_se, var, var_se;
};

Moments moments(const RealVector& x) {
  const auto n = static_cast<double>(x.size());
  const double mean = x.mean();
  const RealVector c = x.array() - mean;
  const double m2 = c.squaredNorm() / n;
  const double m4 = c.array().pow(4).sum() / n;
  const double var = m2 * n / (n - 1.0);
  return {mean, std::sqrt(var / n), var, std::sqrt(std::max(m4 - m2 * m2, 0.0) / n)};
}

std::string run_simulate(const RunConfig& cfg) {
  const PathSet p = simulate(cfg, cfg.cmd.scheme, cfg.numerics.atoms, cfg.cmd.dump_paths);
  auto os = csv_stream();
  if (cfg.cmd.dump_paths) {
    os << "path,t,V\n";
    for (Eigen::Index i = 0; i < p.V.rows(); ++i)
      for (Eigen::Index j = 0; j < p.V.cols(); ++j)
        os << i << ',' << p.grid.time(static_cast<std::size_t>(j)) << ',' << p.V(i, j) << '\n';
    return os.str();
  }
  const Moments v = moments(p.V_T);
  os << "statistic,value\n";
  os << "scheme," << p.scheme << '\n';
  os << "paths," << p.n_paths << '\n';
  os << "steps," << p.grid.steps << '\n';
  os << "seed," << p.seed << '\n';
  os << "mean_V_T," << v.mean << '\n';
  os << "se_mean_V_T," << v.mean_se << '\n';
  os << "var_V_T," << v.var << '\n';
  os << "se_var_V_T," << v.var_se << '\n';
  if (p.has_price) {
    const Moments l = moments(p.L_T);
    os << "mean_L_T," << l.mean << '\n';
    os << "se_mean_L_T," << l.mean_se << '\n';
    const MCEstimate s = mc_transform(p, ExponentTriple{{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
    os << "mean_S_T," << s.value.real() << '\n';
    os << "se_mean_S_T," << s.standard_error << '\n';
  }
  os << "truncated_steps," << p.truncated << '\n';
  os << "truncation_fraction," << p.truncation_fraction() << '\n';
  return os.str();
}

std::string run_lift_compare(const RunConfig& cfg) {
  const KernelSpec k = cfg.kernel_spec();
  const ModelParams m = cfg.model_params();
  if (cfg.cmd.w != cplx(0.0, 0.0)) throw ArgumentError("lift-compare supports w = 0 only");
  const ExponentTriple e{cfg.cmd.u, cfg.cmd.v, {0.0, 0.0}};
  const RiccatiSolution ref = solve_riccati_volterra(k, m, e, cfg.cmd.T, cfg.numerics.n, cfg.riccati_options());

  json rows = json::array();
  for (std::size_t count : cfg.numerics.atom_counts) {
    const Atoms atoms = cfg.atoms(count);
    const ComplexVector h = ComplexVector::Constant(static_cast<Eigen::Index>(atoms.size()), cfg.cmd.v);
    const LiftRiccatiSolution lift =
        solve_lift_riccati(atoms, m, h, cfg.cmd.T, cfg.numerics.n, cfg.cmd.u, cfg.riccati_options());
    // Node 0 is skipped: for v != 0 and a singular kernel psi(0) is infinite.
    const double err = (lift.psi_reduced.tail(ref.psi.size() - 1) - ref.psi.tail(ref.psi.size() - 1)).cwiseAbs().maxCoeff();
    rows.push_back({{"atoms", atoms.size()}, {"psi_error", err}});
  }

  const std::size_t largest = *std::max_element(cfg.numerics.atom_counts.begin(), cfg.numerics.atom_counts.end());
  const PathSet pv = simulate(cfg, "volterra", largest, false);
  const PathSet pl = simulate(cfg, "lift", largest, false);
  const Moments mv = moments(pv.V_T);
  const Moments ml = moments(pl.V_T);
  const double z_mean = std::abs(mv.mean - ml.mean) / std::hypot(mv.mean_se, ml.mean_se);
  const double z_var = std::abs(mv.var - ml.var) / std::hypot(mv.var_se, ml.var_se);

  json j = report("lift-compare", cfg);
  j["result"] = {
      {"riccati", rows},
      {"moments",
       {{"atoms", largest},
        {"volterra", {{"mean", mv.mean}, {"mean_se", mv.mean_se}, {"var", mv.var}, {"var_se", mv.var_se}}},
        {"lift", {{"mean", ml.mean}, {"mean_se", ml.mean_se}, {"var", ml.var}, {"var_se", ml.var_se}}},
        {"z_mean", z_mean},
        {"z_var", z_var},
        {"within_3se", z_mean < 3.0 && z_var < 3.0}}}};
  return j.dump(2) + "\n";
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"resolvent", "riccati", "cf", "price", "simulate", "lift-compare"};
  return names;
}

std::string execute(const std::string& command, const RunConfig& cfg) {
  if (command == "resolvent") return run_resolvent(cfg);
  if (command == "riccati") return run_riccati(cfg);
  if (command == "cf") return run_cf(cfg);
  if (command == "price") return run_price(cfg);
  if (command == "simulate") return run_simulate(cfg);
  if (command == "lift-compare") return run_lift_compare(cfg);
  throw ArgumentError("unknown command " + command);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const std::domain_error*>(&e))
    return exit_validation;
  return exit_numerical;
}

std::string error_record(const std::exception& e) {
  json err;
  err["schema"] = 1;
  json body;
  body["message"] = e.what();
  if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
    body["kind"] = "config";
    body["problems"] = c->problems();
  } else if (const auto* n = dynamic_cast<const NumericalError*>(&e)) {
    body["kind"] = "numerical";
    body["solver"] = n->solver();
    body["index"] = n->index() == NumericalError::npos ? json(nullptr) : json(n->index());
  } else {
    body["kind"] = exit_code_for(e) == exit_validation ? "validation" : "numerical";
  }
  err["error"] = body;
  return err.dump() + "\n";
}

int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const std::string artifact = execute(command, cfg);
    out << artifact;
    out.flush();
    return exit_ok;
  } catch (const std::exception& e) {
    err << error_record(e);
    return exit_code_for(e);
  }
}

}  // namespace affvol
