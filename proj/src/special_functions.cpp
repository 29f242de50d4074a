#include "affvol/special_functions.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "affvol/errors.hpp"

namespace affvol {

namespace {

using cld = std::complex<long double>;

constexpr double kPi = std::numbers::pi;

std::complex<double> ml_series(double a, double b, std::complex<double> z, double tol) {
  const cld zl(z.real(), z.imag());
  cld sum = 0.0L;
  cld power = 1.0L;
  int small_run = 0;
  for (int k = 0; k < 20000; ++k) {
    const long double arg = static_cast<long double>(a) * k + b;
    if (arg > 1700.0L) break;
    const cld term = power / std::tgamma(arg);
    sum += term;
    if (std::abs(term) <= tol * std::abs(sum) || term == cld(0.0L)) {
      if (++small_run >= 3) break;
    } else {
      small_run = 0;
    }
    power *= zl;
  }
  return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

// Branch-cut integral plus principal-sheet residue, valid for b < 1 + a.
std::complex<double> ml_contour(double a, double b, std::complex<double> z) {
  using std::complex;
  const complex<double> em = std::polar(1.0, -kPi * (a - b));
  const complex<double> ep = std::polar(1.0, kPi * (a - b));
  const complex<double> sm = std::polar(1.0, -kPi * a);
  const complex<double> sp = std::polar(1.0, kPi * a);
  const complex<double> inv2pii = 1.0 / complex<double>(0.0, 2.0 * kPi);

  auto integrand = [&](double r) -> complex<double> {
    if (r <= 0.0) return 0.0;
    const double ra = std::pow(r, a);
    const double pre = std::exp(-r) * std::pow(r, a - b);
    if (pre == 0.0) return 0.0;
    const complex<double> bracket = em / (ra * sm - z) - ep / (ra * sp - z);
    return pre * bracket * inv2pii;
  };

  boost::math::quadrature::exp_sinh<double> integrator(12);
  const double tol = 1e-14;
  const double re = integrator.integrate([&](double r) { return integrand(r).real(); }, tol);
  const double im = integrator.integrate([&](double r) { return integrand(r).imag(); }, tol);
  complex<double> value(re, im);

  const double arg = std::arg(z);
  if (std::abs(arg) < a * kPi) {
    const complex<double> pole = std::polar(std::pow(std::abs(z), 1.0 / a), arg / a);
    value += std::pow(pole, 1.0 - b) * std::exp(pole) / a;
  }
  return value;
}

}  // namespace

double gamma_fn(double x) {
  if (!(x > 0.0)) throw DomainError("gamma_fn: argument must be positive");
  return std::tgamma(x);
}

std::complex<double> mittag_leffler(const MLParams& p, std::complex<double> z) {
  if (!(p.a > 0.0) || p.a > 1.0) throw ArgumentError("mittag_leffler: a must lie in (0, 1]");
  if (!(p.b > 0.0)) throw ArgumentError("mittag_leffler: b must be positive");
  if (!(p.series_tol > 0.0) || !(p.switch_radius > 0.0))
    throw ArgumentError("mittag_leffler: series_tol and switch_radius must be positive");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError("mittag_leffler: argument must be finite");

  if (p.a == 1.0 && p.b == 1.0) return std::exp(z);
  if (std::abs(z) <= p.switch_radius) return ml_series(p.a, p.b, z, p.series_tol);

  // Pole on the branch cut: the contour form degenerates, fall back to the series.
  if (std::abs(std::abs(std::arg(z)) - p.a * kPi) < 1e-12) return ml_series(p.a, p.b, z, p.series_tol);

  // Lower b into the range where the small circle around the origin vanishes.
  if (p.b >= 1.0 + p.a) {
    MLParams lower = p;
    lower.b = p.b - p.a;
    return (mittag_leffler(lower, z) - 1.0 / gamma_fn(lower.b)) / z;
  }
  return ml_contour(p.a, p.b, z);
}

double mittag_leffler(const MLParams& p, double x) { return mittag_leffler(p, std::complex<double>(x, 0.0)).real(); }

}  // namespace affvol
