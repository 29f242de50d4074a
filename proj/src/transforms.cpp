#include "affvol/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <thread>

#include <boost/math/tools/toms748_solve.hpp>

#include "affvol/special_functions.hpp"

namespace affvol {

ForwardCurve forward_curve(const KernelSpec& k, const ModelParams& m, double T_max, std::size_t n) {
  if (m.lambda < 0.0) throw ArgumentError("forward_curve: lambda must be nonnegative");
  ForwardCurve fc{UniformGrid(T_max, n), {}, {}};
  const auto pts = static_cast<Eigen::Index>(fc.grid.points());
  fc.xi0.resize(pts);
  if (m.lambda == 0.0) {
    fc.resolvent_cumulative = RealVector::Zero(pts);
    for (Eigen::Index j = 0; j < pts; ++j) fc.xi0[j] = m.V0 + m.beta * k.cumulative(fc.grid.time(static_cast<std::size_t>(j)));
    return fc;
  }
  if (const auto closed = resolvent_analytic_cumulative(k, m.lambda)) {
    fc.resolvent_cumulative.resize(pts);
    for (Eigen::Index j = 0; j < pts; ++j) fc.resolvent_cumulative[j] = (*closed)(fc.grid.time(static_cast<std::size_t>(j)));
  } else {
    fc.resolvent_cumulative = resolvent_numeric(k, m.lambda, T_max, n).cumulative;
  }
  const RealVector& cum = fc.resolvent_cumulative;
  // beta * C / lambda = theta * C.
  fc.xi0 = m.V0 * (1.0 - cum.array()).matrix() + (m.beta / m.lambda) * cum;
  return fc;
}

namespace {

void require_heston_leg(const ModelParams& m) {
  m.validate();
  if (m.alpha0 != 0.0) throw ArgumentError("transform requires the square-root class (alpha0 = 0)");
}

double trapezoid(const RealVector& f, double dt) {
  return dt * (f.sum() - 0.5 * (f[0] + f[f.size() - 1]));
}

template <typename Scalar>
Scalar trapezoid_c(const Vector<Scalar>& f, double dt) {
  return dt * (f.sum() - 0.5 * (f[0] + f[f.size() - 1]));
}

}  // namespace

TransformValue cf_general(const KernelSpec& k, const ModelParams& m, const ExponentTriple& e, double T, std::size_t n,
                          const RiccatiOptions& opts) {
  require_heston_leg(m);
  TransformValue out{e, T, {1.0, 0.0}, {0.0, 0.0}, "volterra", {}};
  const RiccatiSolution sol = solve_riccati_volterra(k, m, e, T, n, opts);
  out.warnings = sol.warnings;
  const ForwardCurve fc = forward_curve(k, m, T, n);
  const RealVector reversed = fc.xi0.reverse();

  const RiccatiQuadrature rule(k, sol.grid, sol.singular_origin, opts.singular_cells);
  cplx log_value = rule.integrate(riccati_q_map(m, e.u), sol.psi, sol.eta0, reversed);
  if (e.v != cplx(0.0, 0.0)) log_value += e.v * fc.xi0[fc.xi0.size() - 1];
  if (e.w != cplx(0.0, 0.0)) log_value += e.w * trapezoid(fc.xi0, fc.grid.dt());
  out.log_value = log_value;
  out.value = std::exp(e.u * m.L0 + log_value);
  return out;
}

TransformValue cf_rough_heston(double alpha, const ModelParams& m, cplx u, double T, std::size_t n,
                               const RiccatiOptions& opts) {
  require_heston_leg(m);
  const ExponentTriple e{u, {0.0, 0.0}, {0.0, 0.0}};
  TransformValue out{e, T, {1.0, 0.0}, {0.0, 0.0}, "fractional", {}};
  const RiccatiSolution sol = solve_fractional_riccati(alpha, m, u, T, n, opts);
  out.warnings = sol.warnings;
  const double dt = sol.grid.dt();
  const cplx integral = trapezoid_c<cplx>(sol.psi, dt);
  cplx frac_at_T;
  if (alpha == 1.0) {
    frac_at_T = sol.psi[sol.psi.size() - 1];
  } else {
    const RealVector re = fractional_integral(1.0 - alpha, sol.psi.real(), dt);
    const RealVector im = fractional_integral(1.0 - alpha, sol.psi.imag(), dt);
    frac_at_T = {re[re.size() - 1], im[im.size() - 1]};
  }
  out.log_value = m.beta * integral + m.V0 * frac_at_T;
  out.value = std::exp(u * m.L0 + out.log_value);
  return out;
}

ModelParams lift_shifted_model(const ModelParams& m) {
  ModelParams s = m;
  s.beta = m.beta - m.lambda * m.V0;
  s.alpha0 = m.alpha0 + m.a * m.V0;
  s.V0 = 0.0;
  return s;
}

TransformValue cf_lift(const Atoms& atoms, const ModelParams& m, cplx v, double T, std::size_t n) {
  m.validate();
  const ExponentTriple e{{0.0, 0.0}, v, {0.0, 0.0}};
  TransformValue out{e, T, {1.0, 0.0}, {0.0, 0.0}, "lift", {}};
  if (!e.in_validated_domain()) out.warnings.emplace_back("exponent outside the validated domain");
  const ModelParams shifted = lift_shifted_model(m);
  const ComplexVector h = ComplexVector::Constant(static_cast<Eigen::Index>(atoms.size()), v);
  const LiftRiccatiSolution sol = solve_lift_riccati(atoms, shifted, h, T, n);
  out.log_value = v * m.V0 + sol.phi[sol.phi.size() - 1];
  out.value = std::exp(out.log_value);
  return out;
}

double black_scholes_total_variance(double S0, double strike, double total_variance, OptionKind kind) {
  double call;
  if (total_variance <= 0.0) {
    call = std::max(S0 - strike, 0.0);
  } else {
    const double sd = std::sqrt(total_variance);
    const double d1 = (std::log(S0 / strike) + 0.5 * total_variance) / sd;
    const double d2 = d1 - sd;
    auto ncdf = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
    call = S0 * ncdf(d1) - strike * ncdf(d2);
  }
  return kind == OptionKind::call ? call : call - S0 + strike;
}

double black_scholes(double S0, double strike, double T, double vol, OptionKind kind) {
  return black_scholes_total_variance(S0, strike, vol * vol * T, kind);
}

std::vector<double> price_from_transform(const std::function<cplx(cplx)>& log_phi, double S0,
                                         const std::vector<double>& strikes, double reference_variance,
                                         OptionKind kind, const InversionGrid& grid) {
  if (!(grid.step > 0.0) || !(grid.truncation > grid.step)) throw ArgumentError("inversion grid: need 0 < step < truncation");
  if (!(S0 > 0.0)) throw ArgumentError("price: S0 must be positive");
  for (double K : strikes)
    if (!(K > 0.0)) throw ArgumentError("price: strikes must be positive");

  const auto count = static_cast<std::size_t>(std::floor(grid.truncation / grid.step)) + 1;
  std::vector<cplx> diff(count);
  auto sample = [&](std::size_t i) {
    const cplx u(0.5, static_cast<double>(i) * grid.step);
    const cplx reference = std::exp(0.5 * (u * u - u) * reference_variance);
    diff[i] = std::exp(log_phi(u)) - reference;
  };

  unsigned threads = grid.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : grid.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) sample(i);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < threads; ++t)
      jobs.push_back(std::async(std::launch::async, [&, t] {
        for (std::size_t i = t; i < count; i += threads) sample(i);
      }));
    for (auto& j : jobs) j.get();
  }

  std::vector<double> prices;
  prices.reserve(strikes.size());
  for (double K : strikes) {
    const double logm = std::log(K / S0);
    double integral = 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const double y = static_cast<double>(i) * grid.step;
      const double term = (std::exp(cplx(0.0, -y * logm)) * diff[i]).real() / (y * y + 0.25);
      const double weight = (i == 0 || i + 1 == count) ? 0.5 : 1.0;
      integral += weight * term;
      if (i + 1 == count) tail = std::abs(diff[i]) / (y * y + 0.25);
    }
    if (tail > grid.tail_tolerance)
      throw NumericalError("price: Fourier integrand not negligible at the truncation point");
    integral *= grid.step;
    const double call = black_scholes_total_variance(S0, K, reference_variance, OptionKind::call) -
                        std::sqrt(S0 * K) / std::numbers::pi * integral;
    prices.push_back(kind == OptionKind::call ? call : call - S0 + K);
  }
  return prices;
}

std::vector<double> price_european(const KernelSpec& k, const ModelParams& m, const std::vector<double>& strikes,
                                   double T, OptionKind kind, const InversionGrid& grid) {
  require_heston_leg(m);
  const ForwardCurve fc = forward_curve(k, m, T, grid.time_steps);
  const double reference = trapezoid(fc.xi0, fc.grid.dt());
  auto log_phi = [&](cplx u) {
    return cf_general(k, m, ExponentTriple{u, {0.0, 0.0}, {0.0, 0.0}}, T, grid.time_steps).log_value;
  };
  return price_from_transform(log_phi, std::exp(m.L0), strikes, reference, kind, grid);
}

double price_european(const KernelSpec& k, const ModelParams& m, double strike, double T, OptionKind kind,
                      const InversionGrid& grid) {
  return price_european(k, m, std::vector<double>{strike}, T, kind, grid).front();
}

double implied_vol(double price, double S0, double strike, double T, OptionKind kind) {
  if (!(S0 > 0.0) || !(strike > 0.0) || !(T > 0.0)) throw DomainError("implied_vol: S0, strike and T must be positive");
  const double call = kind == OptionKind::call ? price : price + S0 - strike;
  const double lower = std::max(S0 - strike, 0.0);
  const double scale = std::max(S0, strike);
  if (call < lower - 1e-14 * scale || call >= S0) throw DomainError("implied_vol: price outside no-arbitrage bounds");
  if (call <= lower) return 0.0;

  auto f = [&](double vol) { return black_scholes(S0, strike, T, vol, OptionKind::call) - call; };
  double hi = 1.0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e4) throw DomainError("implied_vol: price too close to the upper bound");
  }
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(
      f, 0.0, hi, f(0.0), f(hi), [](double a, double b) { return std::abs(b - a) < 1e-13; }, iterations);
  return 0.5 * (root.first + root.second);
}

}  // namespace affvol
