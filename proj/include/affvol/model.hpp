#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace affvol {

using cplx = std::complex<double>;

/// Affine coefficients b(x) = beta - lambda x, sigma(x)^2 = alpha0 + a x, plus
/// the price leg (sigma, rho, V0, L0) of the Volterra-Heston model.
struct ModelParams {
  double beta = 0.0;
  double lambda = 0.0;
  double alpha0 = 0.0;
  double a = 0.0;
  double sigma = 0.0;
  double rho = 0.0;
  double V0 = 0.0;
  double L0 = 0.0;

  /// Heston-type parameterization with beta = lambda * theta and a = sigma^2.
  static ModelParams heston(double lambda, double theta, double sigma, double rho, double V0, double L0 = 0.0);

  /// theta = beta / lambda; empty when lambda == 0.
  std::optional<double> theta() const;

  bool square_root_class() const { return alpha0 == 0.0 && a > 0.0; }
  bool ou_class() const { return a == 0.0; }

  /// Violated invariants; empty when the parameters describe a supported model.
  std::vector<std::string> problems() const;
  /// Throws ArgumentError listing problems().
  void validate() const;
};

/// Exponents of E[exp(u L_T + v V_T + w int_0^T V)].
struct ExponentTriple {
  cplx u{0.0, 0.0};
  cplx v{0.0, 0.0};
  cplx w{0.0, 0.0};

  /// Re u in [0,1], Re v <= 0, Re w <= 0.
  bool in_validated_domain() const {
    return u.real() >= 0.0 && u.real() <= 1.0 && v.real() <= 0.0 && w.real() <= 0.0;
  }
};

/// Q(u, z) = (u^2 - u)/2 + sigma rho u z + sigma^2 z^2 / 2.
template <typename Scalar>
Scalar riccati_q(const ModelParams& m, const Scalar& u, const Scalar& z) {
  return 0.5 * (u * u - u) + m.sigma * m.rho * u * z + 0.5 * m.sigma * m.sigma * z * z;
}

/// R_phi(y) = beta y + alpha0 y^2 / 2.
template <typename Scalar>
Scalar riccati_r_phi(const ModelParams& m, const Scalar& y) {
  return m.beta * y + 0.5 * m.alpha0 * y * y;
}

/// R_Psi(y) = -lambda y + a y^2 / 2.
template <typename Scalar>
Scalar riccati_r_psi(const ModelParams& m, const Scalar& y) {
  return -m.lambda * y + 0.5 * m.a * y * y;
}

inline cplx Q(const ModelParams& m, cplx u, cplx z) { return riccati_q(m, u, z); }
inline cplx R_phi(const ModelParams& m, cplx y) { return riccati_r_phi(m, y); }
inline cplx R_Psi(const ModelParams& m, cplx y) { return riccati_r_psi(m, y); }

}  // namespace affvol
