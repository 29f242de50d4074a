#pragma once

#include <functional>
#include <optional>
#include <string>

#include "affvol/kernel.hpp"

namespace affvol {

/// Resolvent of the second kind R of lambda*K on a uniform grid:
///   lambda K - R = R * (lambda K).
/// `samples[0]` holds the cell average over the first cell when K is
/// singular at the origin.
struct ResolventTable {
  KernelSpec kernel;
  double lambda = 0.0;
  UniformGrid grid;
  RealVector samples;
  RealVector cumulative;
  std::string method;
};

/// Closed-form R(t) for constant and power-law kernels; empty otherwise.
std::optional<std::function<double(double)>> resolvent_analytic(const KernelSpec& k, double lambda);

/// Closed-form cumulative int_0^t R for constant and power-law kernels.
std::optional<std::function<double(double)>> resolvent_analytic_cumulative(const KernelSpec& k, double lambda);

/// Tabulates the closed forms on the grid. Throws ArgumentError when unavailable.
ResolventTable resolvent_table_analytic(const KernelSpec& k, double lambda, double T, std::size_t n);

/// Solves for the cumulative resolvent C = lambda K1 - lambda K * C by
/// trapezoidal product integration, then recovers R from the defining identity.
ResolventTable resolvent_numeric(const KernelSpec& k, double lambda, double T, std::size_t n);

/// max_j>=1 |lambda K(t_j) - R(t_j) - (R * lambda K)(t_j)|, the convolution
/// integrating K exactly against the increments of the cumulative column.
double resolvent_residual(const ResolventTable& tbl);

/// lambda^-1 R as its own object; reduces to K exactly when lambda == 0.
class ScaledResolvent {
 public:
  ScaledResolvent(const KernelSpec& k, double lambda, double T, std::size_t n);

  double lambda() const { return lambda_; }
  const UniformGrid& grid() const { return grid_; }

  /// Value at grid node j >= 1.
  double value(std::size_t j) const;
  /// int_0^{t_j} of lambda^-1 R.
  double cumulative(std::size_t j) const;
  /// Product-integration weights for convolutions against lambda^-1 R.
  const ProductWeights& weights() const { return weights_; }

 private:
  KernelSpec kernel_;
  double lambda_;
  UniformGrid grid_;
  RealVector values_;
  RealVector cumulative_;
  ProductWeights weights_;
};

}  // namespace affvol
