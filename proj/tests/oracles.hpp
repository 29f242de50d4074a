#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <complex>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace oracle {

using cplx = std::complex<double>;

/// Lanczos approximation (g = 7, n = 9), valid for x > 0.5 and reflected below.
inline double lanczos_gamma(double x) {
  static const double c[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                              771.32342877765313,   -176.61502916214059,   12.507343278686905,
                              -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double pi = 3.14159265358979323846;
  if (x < 0.5) return pi / (std::sin(pi * x) * lanczos_gamma(1.0 - x));
  x -= 1.0;
  double a = c[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return std::sqrt(2.0 * pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

/// Plain power series of E_{a,b}(z) with a log-gamma recursion in long double.
inline std::complex<long double> ml_series(double a, double b, std::complex<long double> z, int terms = 400) {
  std::complex<long double> sum = 0.0L;
  std::complex<long double> zk = 1.0L;
  for (int k = 0; k < terms; ++k) {
    const long double arg = static_cast<long double>(a) * k + b;
    sum += zk / std::tgamma(arg);
    zk *= z;
    if (std::abs(zk) == 0.0L) break;
  }
  return sum;
}

/// Classical Heston: log E[exp(u (L_T - L0))] in the "little trap" form.
inline cplx heston_log_cf(cplx u, double lambda, double theta, double sigma, double rho, double V0, double T) {
  const cplx b = lambda - sigma * rho * u;
  const cplx d = std::sqrt(b * b - sigma * sigma * (u * u - u));
  const cplx g = (b - d) / (b + d);
  const cplx e = std::exp(-d * T);
  const cplx D = (b - d) / (sigma * sigma) * (1.0 - e) / (1.0 - g * e);
  const cplx C = lambda * theta / (sigma * sigma) * ((b - d) * T - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
  return C + V0 * D;
}

/// Classical Heston psi(t) solving psi' = Q(u, psi) - lambda psi, psi(0) = 0.
inline cplx heston_psi(cplx u, double lambda, double sigma, double rho, double t) {
  const cplx b = lambda - sigma * rho * u;
  const cplx d = std::sqrt(b * b - sigma * sigma * (u * u - u));
  const cplx g = (b - d) / (b + d);
  const cplx e = std::exp(-d * t);
  return (b - d) / (sigma * sigma) * (1.0 - e) / (1.0 - g * e);
}

/// CIR moments of V_T for dV = lambda (theta - V) dt + sigma sqrt(V) dW.
inline double cir_mean(double lambda, double theta, double V0, double T) {
  return theta + (V0 - theta) * std::exp(-lambda * T);
}
inline double cir_variance(double lambda, double theta, double sigma, double V0, double T) {
  const double e = std::exp(-lambda * T);
  return V0 * sigma * sigma * e * (1.0 - e) / lambda + theta * sigma * sigma * (1.0 - e) * (1.0 - e) / (2.0 * lambda);
}

/// Undiscounted Black-Scholes call.
inline double bs_call(double S, double K, double vol, double T) {
  if (vol * vol * T <= 0.0) return std::max(S - K, 0.0);
  const double sd = vol * std::sqrt(T);
  const double d1 = (std::log(S / K) + 0.5 * sd * sd) / sd;
  auto N = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  return S * N(d1) - K * N(d1 - sd);
}

/// Heston call by Gil-Pelaez, integrals on (0, inf) by exp-sinh quadrature.
inline double heston_call(double S, double K, double lambda, double theta, double sigma, double rho, double V0,
                          double T) {
  const double pi = 3.14159265358979323846;
  const double k = std::log(K / S);
  auto integrand = [&](double y, bool share) {
    // The share-measure probability uses phi(1 + iy), since E[exp(L_T - L0)] = 1.
    const cplx u = share ? cplx(1.0, y) : cplx(0.0, y);
    const cplx phi = std::exp(heston_log_cf(u, lambda, theta, sigma, rho, V0, T));
    return (std::exp(cplx(0.0, -y * k)) * phi / cplx(0.0, y)).real();
  };
  boost::math::quadrature::exp_sinh<double> q;
  const double p1 = q.integrate([&](double y) { return integrand(y, true); }, 0.0, INFINITY, 1e-13);
  const double p2 = q.integrate([&](double y) { return integrand(y, false); }, 0.0, INFINITY, 1e-13);
  return S * (0.5 + p1 / pi) - K * (0.5 + p2 / pi);
}

}  // namespace oracle
