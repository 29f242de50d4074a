// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "affvol/montecarlo.hpp"
#include "affvol/resolvent.hpp"
#include "affvol/riccati.hpp"
#include "affvol/special_functions.hpp"
#include "affvol/transforms.hpp"
#include "oracles.hpp"

using namespace affvol;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Classical parameters of criteria 1 and 9.
constexpr double kLambda = 2.0, kTheta = 0.04, kSigma = 0.3, kRho = -0.7, kV0 = 0.04;

ModelParams classical() { return ModelParams::heston(kLambda, kTheta, kSigma, kRho, kV0, 0.0); }

// Rough desk parameters.
ModelParams desk(double L0 = 0.0) { return ModelParams::heston(0.3, 0.05, 0.3, -0.7, 0.04, L0); }

Outcome classical_limit() {
  const KernelSpec k = KernelSpec::constant(1.0);
  const ModelParams m = classical();
  double worst = 0.0, slowest = 0.0;
  for (const cplx u : {cplx(0.5, 3.0), cplx(0.5, -3.0), cplx(0.5, 10.0), cplx(0.5, -10.0)}) {
    const auto t0 = std::chrono::steady_clock::now();
    const cplx value = cf_general(k, m, ExponentTriple{u, 0.0, 0.0}, 1.0, 2000).value;
    slowest = std::max(slowest, seconds_since(t0));
    const cplx ref = std::exp(oracle::heston_log_cf(u, kLambda, kTheta, kSigma, kRho, kV0, 1.0));
    worst = std::max(worst, std::abs(value - ref) / std::abs(ref));
  }
  return {worst < 1e-6 && slowest < 2.0, fmt("max rel err %.3e", worst) + fmt(", slowest point %.3f s", slowest)};
}

Outcome resolvent_identities() {
  const double analytic = resolvent_residual(resolvent_table_analytic(KernelSpec::constant(1.0), 2.0, 1.0, 2000));
  const KernelSpec rough = KernelSpec::power_law(0.6);
  const ResolventTable num = resolvent_numeric(rough, 1.0, 1.0, 2000);
  const double numeric = resolvent_residual(num);
  double sup_rel = 0.0;
  for (std::size_t j = 1; j < num.grid.points(); ++j) {
    const double t = num.grid.time(j);
    if (t < 0.01) continue;
    const double z = -std::pow(t, 0.6);
    const double ref = std::pow(t, -0.4) * static_cast<double>(oracle::ml_series(0.6, 0.6, z).real());
    sup_rel = std::max(sup_rel, std::abs(num.samples[static_cast<Eigen::Index>(j)] - ref) / std::abs(ref));
  }
  return {analytic < 1e-10 && numeric < 1e-4 && sup_rel < 1e-4,
          fmt("constant residual %.3e", analytic) + fmt(", power-law residual %.3e", numeric) +
              fmt(", vs Mittag-Leffler %.3e", sup_rel)};
}

Outcome mittag_leffler_checks() {
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double x = -5.0 + 0.5 * i;
    worst = std::max(worst, std::abs(mittag_leffler(MLParams{1.0, 1.0}, x) - std::exp(x)));
  }
  const double at0 = std::abs(mittag_leffler(MLParams{0.6, 0.6}, 0.0) - 1.0 / oracle::lanczos_gamma(0.6));
  return {worst < 1e-10 && at0 < 1e-12, fmt("|E11 - exp| %.3e", worst) + fmt(", |E(0) - 1/Gamma(0.6)| %.3e", at0)};
}

Outcome four_formulations() {
  const auto t0 = std::chrono::steady_clock::now();
  const KernelSpec k = KernelSpec::power_law(0.6);
  const ModelParams m = desk();
  const cplx u(0.0, 2.0);
  const std::size_t n = 2000;
  const RiccatiSolution vol = solve_riccati_volterra(k, m, ExponentTriple{u, 0.0, 0.0}, 1.0, n);
  const RiccatiSolution frac = solve_fractional_riccati(0.6, m, u, 1.0, n);
  const ConvolutionRiccatiSolution conv = solve_convolution_riccati(k, m, u, 1.0, n);
  const double vf = (vol.psi - frac.psi).cwiseAbs().maxCoeff();
  ComplexVector q(vol.psi.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) q[j] = Q(m, u, vol.psi[j]);
  const double qg = (q - conv.g).cwiseAbs().maxCoeff();

  std::vector<double> errs;
  for (std::size_t count : {10, 50, 200}) {
    const Atoms atoms = discretize_measure(measure_of(k), count, 1e6);
    const ComplexVector h = ComplexVector::Zero(static_cast<Eigen::Index>(atoms.size()));
    const LiftRiccatiSolution lift = solve_lift_riccati(atoms, m, h, 1.0, n, u);
    errs.push_back((lift.psi_reduced - vol.psi).cwiseAbs().maxCoeff());
  }
  const bool decreasing = errs[0] > errs[1] && errs[1] > errs[2];
  const double secs = seconds_since(t0);
  return {vf < 1e-4 && qg < 1e-4 && decreasing && errs[2] < 5e-3 && secs < 30.0,
          fmt("volterra-fractional %.3e", vf) + fmt(", Q-g %.3e", qg) + fmt(", lift %.3e", errs[0]) +
              fmt("/%.3e", errs[1]) + fmt("/%.3e", errs[2]) + fmt(", %.1f s", secs)};
}

Outcome normalization() {
  double worst = 0.0, largest_abs = 0.0;
  const double L0 = std::log(1.3);
  for (const KernelSpec& k : {KernelSpec::constant(1.0), KernelSpec::power_law(0.6)}) {
    const ModelParams m = desk(L0);
    worst = std::max(worst, std::abs(cf_general(k, m, ExponentTriple{0.0, 0.0, 0.0}, 1.0, 500).value - 1.0));
    worst = std::max(worst,
                     std::abs(cf_general(k, m, ExponentTriple{1.0, 0.0, 0.0}, 1.0, 500).value - std::exp(L0)));
    for (double y : {1.0, 2.0, 5.0, 10.0}) {
      const cplx v = cf_general(k, m, ExponentTriple{cplx(0.0, y), 0.0, 0.0}, 1.0, 500).value;
      largest_abs = std::max(largest_abs, std::abs(v));
    }
  }
  return {worst < 1e-12 && largest_abs <= 1.0, fmt("identity err %.3e", worst) + fmt(", max |cf(iy)| %.6f", largest_abs)};
}

Outcome monte_carlo() {
  const auto t0 = std::chrono::steady_clock::now();
  const KernelSpec k = KernelSpec::power_law(0.6);
  const ModelParams m = desk();
  SimulationOptions opts;
  opts.with_price = true;
  const PathSet p = simulate_volterra(k, m, 1.0, 500, 100000, 20240601, opts);
  bool pass = true;
  std::string detail;
  for (const cplx u : {cplx(0.0, 1.0), cplx(0.0, 2.0)}) {
    const MCEstimate mc = mc_transform(p, ExponentTriple{u, 0.0, 0.0});
    const cplx ref = cf_rough_heston(0.6, m, u, 1.0, 2000).value;
    const double z = std::abs(mc.value - ref) / mc.standard_error;
    pass = pass && z < 3.0;
    detail += fmt("u=%.0fi: ", u.imag()) + fmt("%.2f SE, ", z);
  }
  const MCEstimate mean = mc_mean_terminal(p);
  const ForwardCurve fc = forward_curve(k, m, 1.0, 2000);
  const double z = std::abs(mean.value.real() - fc.xi0[fc.xi0.size() - 1]) / mean.standard_error;
  const double secs = seconds_since(t0);
  pass = pass && z < 3.0 && secs < 300.0;
  return {pass, detail + fmt("mean V_T %.2f SE", z) + fmt(", %.1f s", secs)};
}

Outcome roughness() {
  SimulationOptions opts;
  opts.store_paths = true;
  std::vector<double> lags;
  for (int e = 9; e >= 5; --e) lags.push_back(std::ldexp(1.0, -e));
  const ModelParams m = desk();
  const PathSet rough = simulate_volterra(KernelSpec::power_law(0.6), m, 1.0, 8192, 1000, 7, opts);
  const PathSet smooth = simulate_volterra(KernelSpec::constant(1.0), m, 1.0, 8192, 1000, 7, opts);
  const double sr = holder_estimate(rough, lags);
  const double ss = holder_estimate(smooth, lags);
  return {std::abs(sr - 0.2) <= 0.1 && std::abs(ss - 1.0) <= 0.1,
          fmt("rough slope %.4f", sr) + fmt(", constant slope %.4f", ss)};
}

Outcome spde_dual() {
  const ModelParams m = desk();
  const ExponentTriple e{0.0, -1.0, 0.0};
  const KernelSpec c = KernelSpec::constant(1.0);
  const double classical = reconstruct_spde_psi(c, m, solve_riccati_volterra(c, m, e, 1.0, 500), -1.0).identity_residual();
  const KernelSpec r = KernelSpec::power_law(0.6);
  const double rough = reconstruct_spde_psi(r, m, solve_riccati_volterra(r, m, e, 1.0, 2000), -1.0).identity_residual();
  return {classical < 1e-6 && rough < 1e-3, fmt("classical %.3e", classical) + fmt(", rough %.3e", rough)};
}

Outcome pricing() {
  const std::vector<double> strikes{0.8, 1.0, 1.2};
  const KernelSpec c = KernelSpec::constant(1.0);

  ModelParams zero;  // beta = V0 = a = 0
  bool intrinsic = true;
  for (const KernelSpec& k : {c, KernelSpec::power_law(0.6)}) {
    const auto calls = price_european(k, zero, strikes, 1.0, OptionKind::call);
    const auto puts = price_european(k, zero, strikes, 1.0, OptionKind::put);
    for (std::size_t i = 0; i < strikes.size(); ++i)
      intrinsic = intrinsic && calls[i] == std::max(1.0 - strikes[i], 0.0) && puts[i] == std::max(strikes[i] - 1.0, 0.0);
  }

  const ModelParams m = classical();
  const auto calls = price_european(c, m, strikes, 1.0, OptionKind::call);
  const auto puts = price_european(c, m, strikes, 1.0, OptionKind::put);
  double parity = 0.0;
  for (std::size_t i = 0; i < strikes.size(); ++i)
    parity = std::max(parity, std::abs(calls[i] - puts[i] - (1.0 - strikes[i])));
  const double ref = oracle::heston_call(1.0, 1.0, kLambda, kTheta, kSigma, kRho, kV0, 1.0);
  const double atm = std::abs(calls[1] - ref);
  return {intrinsic && parity < 1e-10 && atm < 1e-5,
          std::string(intrinsic ? "intrinsic exact" : "intrinsic MISMATCH") + fmt(", parity %.3e", parity) +
              fmt(", ATM vs oracle %.3e", atm)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 classical-limit equivalence", classical_limit},
      {"2 resolvent identities", resolvent_identities},
      {"3 Mittag-Leffler", mittag_leffler_checks},
      {"4 four-formulation psi agreement", four_formulations},
      {"5 martingale and normalization", normalization},
      {"6 Monte Carlo vs analytic", monte_carlo},
      {"7 path roughness", roughness},
      {"8 SPDE-dual identity", spde_dual},
      {"9 pricing", pricing},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
