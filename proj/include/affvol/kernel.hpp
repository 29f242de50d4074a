#pragma once

#include <cstddef>
#include <utility>
#include <variant>

#include "affvol/grid.hpp"

namespace affvol {

/// K(t) = scale * t^(alpha-1) / Gamma(alpha), alpha in (1/2, 1].
struct PowerLaw {
  double alpha = 1.0;
  double scale = 1.0;
};

/// K(t) = c.
struct ConstantKernel {
  double c = 1.0;
};

/// K(t) = sum_i w_i exp(-x_i t), x_i >= 0. Weights may be signed.
struct ExponentialSum {
  RealVector weights;
  RealVector rates;
};

/// Convolution kernel with its regularity exponent gamma
/// (int_0^h K^2 = O(h^gamma)). Immutable after construction.
class KernelSpec {
 public:
  using Variant = std::variant<PowerLaw, ConstantKernel, ExponentialSum>;

  static KernelSpec power_law(double alpha, double scale = 1.0);
  static KernelSpec constant(double c);
  static KernelSpec exponential_sum(RealVector weights, RealVector rates);

  const Variant& variant() const { return variant_; }
  double gamma() const { return gamma_; }

  /// True when K is unbounded at the origin (power law with alpha < 1).
  bool singular_at_origin() const;

  /// K(t). Throws DomainError for t <= 0 on singular kernels and t < 0 otherwise.
  double operator()(double t) const;

  /// int_0^t K.
  double cumulative(double t) const;

  /// int_0^h K^2.
  double square_mass(double h) const;

  /// Exact moments over [lo, hi]: first = int K, second = int (tau - lo)/(hi - lo) K.
  std::pair<double, double> cell_moments(double lo, double hi) const;

 private:
  explicit KernelSpec(Variant v, double gamma) : variant_(std::move(v)), gamma_(gamma) {}

  Variant variant_;
  double gamma_;
};

double kernel_eval(const KernelSpec& k, double t);

/// mu = mass * delta_0.
struct DiracAtZero {
  double mass = 1.0;
};

/// mu(dx) = scale * x^(-alpha) / (Gamma(alpha) Gamma(1 - alpha)) dx.
struct RoughDensity {
  double alpha = 0.6;
  double scale = 1.0;
};

/// Finitely many (possibly signed) atoms.
struct Atoms {
  RealVector weights;
  RealVector rates;

  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

/// Laplace measure mu with K(t) = int exp(-x t) mu(dx).
using LaplaceMeasure = std::variant<DiracAtZero, RoughDensity, Atoms>;

LaplaceMeasure measure_of(const KernelSpec& k);

/// int exp(-x t) mu(dx), evaluated by quadrature for densities.
double laplace_transform(const LaplaceMeasure& m, double t);

struct MeasureGridOptions {
  /// Right edge of the first cell [0, first_edge]; the remaining n-1 cells
  /// form a geometric partition of [first_edge, x_max].
  double first_edge = 0.01;
};

/// n atoms: cell masses and mass centroids of a geometric partition of (0, x_max].
/// Dirac and atomic measures are returned unchanged.
Atoms discretize_measure(const LaplaceMeasure& m, std::size_t n, double x_max, const MeasureGridOptions& opts = {});

KernelSpec kernel_from_atoms(const Atoms& atoms);

/// Product-integration weights of a kernel on a uniform grid.
///
/// Cell m covers tau in [m dt, (m+1) dt]; `first[m]` = int K, `second[m]` =
/// int (tau - m dt)/dt K. For a sampled f linear between nodes,
///   (K * f)(t_j) = f_0 second[j-1] + sum_{i=1..j} f_i node[j-i]
/// with node[0] = first[0] - second[0] and node[m] = second[m-1] + first[m] - second[m].
struct ProductWeights {
  RealVector first;
  RealVector second;
  RealVector node;
  double dt = 0.0;

  ProductWeights() = default;
  ProductWeights(const KernelSpec& k, const UniformGrid& grid);
  /// Build from precomputed cell moments.
  ProductWeights(RealVector first_moments, RealVector second_moments, double dt);

  std::size_t cells() const { return static_cast<std::size_t>(first.size()); }
};

/// (K * f)(t_j) excluding the f_j term; `node[0] * f_j` completes it.
template <typename Scalar>
Scalar convolution_history(const ProductWeights& w, const Vector<Scalar>& f, std::size_t j) {
  if (j == 0) return Scalar(0);
  Scalar acc = f[0] * w.second[static_cast<Eigen::Index>(j - 1)];
  for (std::size_t i = 1; i < j; ++i) acc += f[static_cast<Eigen::Index>(i)] * w.node[static_cast<Eigen::Index>(j - i)];
  return acc;
}

/// (K * f) at every grid node.
template <typename Scalar>
Vector<Scalar> convolve(const ProductWeights& w, const Vector<Scalar>& f) {
  const auto n = static_cast<std::size_t>(f.size());
  Vector<Scalar> out = Vector<Scalar>::Zero(f.size());
  for (std::size_t j = 1; j < n; ++j)
    out[static_cast<Eigen::Index>(j)] = convolution_history(w, f, j) + w.node[0] * f[static_cast<Eigen::Index>(j)];
  return out;
}

/// Riemann-Liouville integral I^alpha f on a uniform grid starting at 0.
RealVector fractional_integral(double alpha, const RealVector& f, double dt);

/// D^alpha f = d/dt I^(1-alpha) f (central differences inside, one-sided at the ends).
RealVector fractional_derivative(double alpha, const RealVector& f, double dt);

}  // namespace affvol
