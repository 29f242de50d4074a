#pragma once

#include <complex>

namespace affvol {

/// Gamma function for positive real arguments.
/// Throws DomainError for x <= 0 (negative arguments are not supported).
double gamma_fn(double x);

/// Parameters of the two-parameter Mittag-Leffler function E_{a,b}.
struct MLParams {
  double a = 1.0;
  double b = 1.0;
  double series_tol = 1e-17;
  /// |z| at or below which the power series is summed directly.
  double switch_radius = 5.0;
};

/// E_{a,b}(z) = sum_k z^k / Gamma(a k + b).
///
/// Small |z| uses the power series summed in extended precision. Larger |z|
/// collapses the Hankel-contour Laplace inversion of s^(a-b) / (s^a - z) onto
/// the branch cut, integrates the resulting real-line integral with
/// double-exponential quadrature and adds the residues of poles on the
/// principal sheet. Supported: 0 < a <= 1, b > 0.
std::complex<double> mittag_leffler(const MLParams& p, std::complex<double> z);

/// Convenience overload for real arguments.
double mittag_leffler(const MLParams& p, double x);

}  // namespace affvol
