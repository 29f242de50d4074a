#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "affvol/kernel.hpp"
#include "affvol/model.hpp"
#include "affvol/resolvent.hpp"

namespace affvol {

/// F(z) = c0 + c1 z + c2 z^2 with complex coefficients. Every right-hand side
/// of the Riccati family (Q(u,.) - lambda . + w, R_Psi, R_phi) has this shape.
struct Quadratic {
  cplx c0{0.0, 0.0};
  cplx c1{0.0, 0.0};
  cplx c2{0.0, 0.0};

  cplx operator()(cplx z) const { return c0 + z * (c1 + c2 * z); }
};

/// Q(u, z) - lambda z + w.
Quadratic riccati_volterra_rhs(const ModelParams& m, const ExponentTriple& e);
/// Q(u, z).
Quadratic riccati_q_map(const ModelParams& m, cplx u);
/// Q(u, z) - lambda z with a in place of sigma^2 (equals R_Psi when u = 0).
Quadratic lift_rhs(const ModelParams& m, cplx u);

/// Product integration of K * F(psi) on a uniform grid.
///
/// F(psi) is taken piecewise linear between nodes and integrated exactly
/// against K. When psi carries a v K singularity at the origin, the first
/// `singular_cells` cells instead use psi(s) = s^(alpha-1) eta(s) with eta
/// piecewise linear, and the weights against s^(alpha-1) and s^(2alpha-2)
/// are evaluated in closed form through incomplete beta functions.
class RiccatiQuadrature {
 public:
  RiccatiQuadrature(const KernelSpec& k, const UniformGrid& grid, bool singular_origin, std::size_t singular_cells = 32);

  const UniformGrid& grid() const { return grid_; }
  bool singular() const { return singular_cells_ > 0; }
  std::size_t singular_cells() const { return singular_cells_; }

  /// Part of (K * F(psi))(t_j) that does not depend on psi_j. `eta0` is
  /// lim_{s->0} s^(1-alpha) psi(s) (ignored for regular solutions).
  cplx history(const Quadratic& f, const ComplexVector& psi, cplx eta0, std::size_t j) const;
  /// Remaining part, as a function of psi_j.
  cplx current(const Quadratic& f, cplx psi_j, std::size_t j) const;
  cplx convolve(const Quadratic& f, const ComplexVector& psi, cplx eta0, std::size_t j) const {
    return history(f, psi, eta0, j) + current(f, psi[static_cast<Eigen::Index>(j)], j);
  }

  /// int_0^T g(s) F(psi(s)) ds for a grid-sampled weight g.
  cplx integrate(const Quadratic& f, const ComplexVector& psi, cplx eta0, const RealVector& g) const;

  /// s^(1-alpha) at node i (1 for regular kernels).
  double eta_factor(std::size_t i) const;

 private:
  double singular_weight(int p, bool right, std::size_t j, std::size_t i) const;

  KernelSpec kernel_;
  UniformGrid grid_;
  ProductWeights weights_;
  RealVector cumulative_;
  std::size_t singular_cells_ = 0;
  double alpha_ = 1.0;
  // [p-1][side] row-major (j-1) * singular_cells_ + i
  std::vector<double> sw_[2][2];
};

struct RiccatiOptions {
  double tolerance = 1e-12;
  int max_iterations = 50;
  double blowup = 1e8;
  std::size_t singular_cells = 32;
  /// Corrector passes of the fractional Adams scheme.
  int adams_corrections = 1;
};

/// Grid-sampled psi with Q(u, psi). When `singular_origin` is set, psi(0)
/// stores the first-cell average v * int_0^dt K / dt and `eta0` the limit
/// of s^(1-alpha) psi(s).
struct RiccatiSolution {
  UniformGrid grid;
  ComplexVector psi;
  ComplexVector q_of_psi;
  std::string solver;
  KernelSpec kernel;
  ModelParams model;
  ExponentTriple exponent;
  bool singular_origin = false;
  cplx eta0{0.0, 0.0};
  std::vector<std::string> warnings;
};

/// psi = v K + K * (Q(u, psi) - lambda psi + w), implicit trapezoidal product
/// integration; the implicit node equation is solved by Newton to tolerance.
RiccatiSolution solve_riccati_volterra(const KernelSpec& k, const ModelParams& m, const ExponentTriple& e, double T,
                                       std::size_t n, const RiccatiOptions& opts = {});

/// D^alpha psi = Q(u, psi) - lambda psi, psi(0) = 0, by the fractional
/// Adams-Bashforth-Moulton predictor-corrector.
RiccatiSolution solve_fractional_riccati(double alpha, const ModelParams& m, cplx u, double T, std::size_t n,
                                         const RiccatiOptions& opts = {}, double scale = 1.0);

struct ConvolutionRiccatiSolution {
  UniformGrid grid;
  ComplexVector g;
  /// lambda^-1 R * g, so that g = Q(u, psi) holds at every node.
  ComplexVector psi;
};

/// g = Q(u, lambda^-1 R * g) by stepwise fixed-point iteration in g.
ConvolutionRiccatiSolution solve_convolution_riccati(const KernelSpec& k, const ModelParams& m, cplx u, double T,
                                                     std::size_t n, const RiccatiOptions& opts = {});

/// Finite-atom lift: d/dt Psi_i = -x_i Psi_i + R(sum_j w_j Psi_j),
/// d/dt phi = R_phi(sum_j w_j Psi_j), Psi(0, x_i) = h_i, phi(0) = 0, with
/// R = Q(u, .) - lambda . (R_Psi when u = 0). Integrated by fourth-order
/// exponential time differencing, so the -x_i Psi_i part is exact.
struct LiftRiccatiSolution {
  Atoms atoms;
  UniformGrid grid;
  /// atoms x grid points.
  Eigen::MatrixXcd Psi;
  ComplexVector phi;
  ComplexVector psi_reduced;
};

LiftRiccatiSolution solve_lift_riccati(const Atoms& atoms, const ModelParams& m, const ComplexVector& h, double T,
                                       std::size_t n, cplx u = {0.0, 0.0}, const RiccatiOptions& opts = {});

/// Mild dual Psi(t, x) of a u = w = 0 Riccati-Volterra solution with h = v delta_0:
/// Psi(t, x) = R_Psi(psi(t - x)) for x < t. The boundary mass at x = t enters
/// only through int h(x - t) K(x) dx = v K(t).
class SpdeDual {
 public:
  SpdeDual(const KernelSpec& k, const ModelParams& m, RiccatiSolution sol, cplx v);

  /// Psi(t_j, t_i) for i < j.
  cplx Psi(std::size_t j, std::size_t i) const;
  /// v K(t_j) + int_0^{t_j} Psi(t_j, x) K(x) dx.
  cplx reconstructed_psi(std::size_t j) const;
  /// max_j>=1 |psi(t_j) - reconstructed_psi(j)|.
  double identity_residual() const;

 private:
  KernelSpec kernel_;
  ModelParams model_;
  RiccatiSolution sol_;
  cplx v_;
  RiccatiQuadrature rule_;
};

SpdeDual reconstruct_spde_psi(const KernelSpec& k, const ModelParams& m, const RiccatiSolution& sol, cplx v);

}  // namespace affvol
