#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "affvol/errors.hpp"

namespace affvol {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RealVector = Vector<double>;
using ComplexVector = Vector<std::complex<double>>;

/// Uniform grid t_j = j * dt, j = 0..steps, on [0, horizon].
struct UniformGrid {
  double horizon = 1.0;
  std::size_t steps = 1;

  UniformGrid() = default;
  UniformGrid(double T, std::size_t n) : horizon(T), steps(n) {
    if (!(T > 0.0)) throw ArgumentError("grid horizon must be positive");
    if (n < 1) throw ArgumentError("grid needs at least one step");
  }

  double dt() const { return horizon / static_cast<double>(steps); }
  double time(std::size_t j) const { return static_cast<double>(j) * dt(); }
  std::size_t points() const { return steps + 1; }

  RealVector times() const { return RealVector::LinSpaced(static_cast<Eigen::Index>(points()), 0.0, horizon); }
};

}  // namespace affvol
