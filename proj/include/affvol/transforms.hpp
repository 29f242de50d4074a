#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "affvol/riccati.hpp"

namespace affvol {

/// xi_0(T) = V0 (1 - int_0^T R) + beta int_0^T lambda^-1 R on a uniform grid.
/// For lambda = 0 this is V0 + beta int_0^T K.
struct ForwardCurve {
  UniformGrid grid;
  RealVector xi0;
  /// int_0^T R at the grid nodes (zero when lambda = 0).
  RealVector resolvent_cumulative;
};

ForwardCurve forward_curve(const KernelSpec& k, const ModelParams& m, double T_max, std::size_t n);

struct TransformValue {
  ExponentTriple exponent;
  double horizon = 0.0;
  cplx value{1.0, 0.0};
  /// log of value without the u L0 term.
  cplx log_value{0.0, 0.0};
  std::string formulation;
  std::vector<std::string> warnings;
};

/// E[exp(u L_T + v V_T + w int_0^T V)] from the kernel-form Riccati solution.
TransformValue cf_general(const KernelSpec& k, const ModelParams& m, const ExponentTriple& e, double T, std::size_t n,
                          const RiccatiOptions& opts = {});

/// E[exp(u L_T)] for the power-law kernel as
/// exp(u L0 + beta int_0^T psi + V0 I^(1-alpha) psi(T)) with psi from the fractional Adams solver.
TransformValue cf_rough_heston(double alpha, const ModelParams& m, cplx u, double T, std::size_t n,
                               const RiccatiOptions& opts = {});

/// E[exp(v V_T)] from the finite-atom lift. Initial variance is handled by
/// shifting to V - V0: beta -> beta - lambda V0, alpha0 -> alpha0 + a V0.
TransformValue cf_lift(const Atoms& atoms, const ModelParams& m, cplx v, double T, std::size_t n);

/// Shifted model used by the lift (V0 moved into the coefficients).
ModelParams lift_shifted_model(const ModelParams& m);

enum class OptionKind { call, put };

struct InversionGrid {
  double truncation = 200.0;
  double step = 0.25;
  /// Time steps of each Riccati solve along the contour.
  std::size_t time_steps = 500;
  /// Largest tolerated |integrand| at the truncation point.
  double tail_tolerance = 1e-7;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Undiscounted Black-Scholes price for total variance w = vol^2 T.
double black_scholes_total_variance(double S0, double strike, double total_variance, OptionKind kind);
double black_scholes(double S0, double strike, double T, double vol, OptionKind kind);

/// Prices by Fourier inversion along Re u = 1/2 of
/// Phi(u) = E[exp(u (L_T - L0))], with a Black-Scholes control variate whose
/// total variance is int_0^T xi_0. All strikes share the contour samples.
std::vector<double> price_from_transform(const std::function<cplx(cplx)>& log_phi, double S0,
                                         const std::vector<double>& strikes, double reference_variance,
                                         OptionKind kind, const InversionGrid& grid);

std::vector<double> price_european(const KernelSpec& k, const ModelParams& m, const std::vector<double>& strikes,
                                   double T, OptionKind kind, const InversionGrid& grid = {});
double price_european(const KernelSpec& k, const ModelParams& m, double strike, double T, OptionKind kind,
                      const InversionGrid& grid = {});

/// Black-Scholes implied volatility of an undiscounted price, to 1e-10.
double implied_vol(double price, double S0, double strike, double T, OptionKind kind = OptionKind::call);

}  // namespace affvol
