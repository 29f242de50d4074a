#include "affvol/riccati.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "affvol/special_functions.hpp"

namespace affvol {

namespace {

void check_finite(cplx z, double guard, std::size_t j, const char* solver) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw NumericalError(std::string(solver) + ": non-finite value", j, solver);
  if (std::abs(z) > guard) throw NumericalError(std::string(solver) + ": solution exceeded the blow-up guard", j, solver);
}

}  // namespace

Quadratic riccati_volterra_rhs(const ModelParams& m, const ExponentTriple& e) {
  const cplx u = e.u;
  return {0.5 * (u * u - u) + e.w, m.sigma * m.rho * u - m.lambda, 0.5 * m.sigma * m.sigma};
}

Quadratic riccati_q_map(const ModelParams& m, cplx u) {
  return {0.5 * (u * u - u), m.sigma * m.rho * u, 0.5 * m.sigma * m.sigma};
}

Quadratic lift_rhs(const ModelParams& m, cplx u) {
  return {0.5 * (u * u - u), m.sigma * m.rho * u - m.lambda, 0.5 * m.a};
}

// ---------------------------------------------------------------------------
// RiccatiQuadrature

RiccatiQuadrature::RiccatiQuadrature(const KernelSpec& k, const UniformGrid& grid, bool singular_origin,
                                     std::size_t singular_cells)
    : kernel_(k), grid_(grid), weights_(k, grid) {
  const auto pts = static_cast<Eigen::Index>(grid.points());
  cumulative_.resize(pts);
  for (Eigen::Index j = 0; j < pts; ++j) cumulative_[j] = k.cumulative(grid.time(static_cast<std::size_t>(j)));
  if (!(singular_origin && k.singular_at_origin())) return;

  const auto& pl = std::get<PowerLaw>(k.variant());
  alpha_ = pl.alpha;
  singular_cells_ = std::clamp<std::size_t>(singular_cells, 1, grid.steps);
  const std::size_t n = grid.steps;
  const double dt = grid.dt();
  for (int p = 1; p <= 2; ++p) {
    const double q = p * (alpha_ - 1.0);
    const double c = pl.scale * std::pow(dt, alpha_ + q) / gamma_fn(alpha_);
    auto& left = sw_[p - 1][0];
    auto& right = sw_[p - 1][1];
    left.assign(n * singular_cells_, 0.0);
    right.assign(n * singular_cells_, 0.0);
    for (std::size_t j = 1; j <= n; ++j) {
      const double jd = static_cast<double>(j);
      const double s0 = std::pow(jd, q + alpha_);
      const double s1 = s0 * jd;
      const std::size_t cells = std::min(singular_cells_, j);
      for (std::size_t i = 0; i < cells; ++i) {
        const double x1 = static_cast<double>(i) / jd;
        const double x2 = std::min(1.0, static_cast<double>(i + 1) / jd);
        using boost::math::beta;
        const double m0 = s0 * (beta(q + 1.0, alpha_, x2) - beta(q + 1.0, alpha_, x1));
        const double m1 = s1 * (beta(q + 2.0, alpha_, x2) - beta(q + 2.0, alpha_, x1));
        const double id = static_cast<double>(i);
        left[(j - 1) * singular_cells_ + i] = c * ((id + 1.0) * m0 - m1);
        right[(j - 1) * singular_cells_ + i] = c * (m1 - id * m0);
      }
    }
  }
}

double RiccatiQuadrature::singular_weight(int p, bool right, std::size_t j, std::size_t i) const {
  return sw_[p - 1][right ? 1 : 0][(j - 1) * singular_cells_ + i];
}

double RiccatiQuadrature::eta_factor(std::size_t i) const {
  if (singular_cells_ == 0) return 1.0;
  return std::pow(grid_.time(i), 1.0 - alpha_);
}

cplx RiccatiQuadrature::history(const Quadratic& f, const ComplexVector& psi, cplx eta0, std::size_t j) const {
  if (j == 0) return 0.0;
  cplx acc = f.c0 * cumulative_[static_cast<Eigen::Index>(j)];
  const std::size_t cut = std::min(singular_cells_, j);
  for (std::size_t i = 0; i < cut; ++i) {
    const cplx eta_l = i == 0 ? eta0 : eta_factor(i) * psi[static_cast<Eigen::Index>(i)];
    acc += f.c1 * eta_l * singular_weight(1, false, j, i) + f.c2 * eta_l * eta_l * singular_weight(2, false, j, i);
    if (i + 1 < j) {
      const cplx eta_r = eta_factor(i + 1) * psi[static_cast<Eigen::Index>(i + 1)];
      acc += f.c1 * eta_r * singular_weight(1, true, j, i) + f.c2 * eta_r * eta_r * singular_weight(2, true, j, i);
    }
  }
  for (std::size_t i = cut; i < j; ++i) {
    const auto m = static_cast<Eigen::Index>(j - i - 1);
    const cplx zl = psi[static_cast<Eigen::Index>(i)];
    acc += zl * (f.c1 + f.c2 * zl) * weights_.second[m];
    if (i + 1 < j) {
      const cplx zr = psi[static_cast<Eigen::Index>(i + 1)];
      acc += zr * (f.c1 + f.c2 * zr) * (weights_.first[m] - weights_.second[m]);
    }
  }
  return acc;
}

cplx RiccatiQuadrature::current(const Quadratic& f, cplx psi_j, std::size_t j) const {
  if (j == 0) return 0.0;
  if (j <= singular_cells_) {
    const cplx eta = eta_factor(j) * psi_j;
    return f.c1 * eta * singular_weight(1, true, j, j - 1) + f.c2 * eta * eta * singular_weight(2, true, j, j - 1);
  }
  return psi_j * (f.c1 + f.c2 * psi_j) * weights_.node[0];
}

cplx RiccatiQuadrature::integrate(const Quadratic& f, const ComplexVector& psi, cplx eta0, const RealVector& g) const {
  const std::size_t n = grid_.steps;
  const double dt = grid_.dt();
  cplx acc = f.c0 * dt * (g.sum() - 0.5 * (g[0] + g[static_cast<Eigen::Index>(n)]));
  const std::size_t cut = singular_cells_;
  auto pow_diff = [](double a, double b, double e) { return std::pow(b, e) - std::pow(a, e); };
  for (std::size_t i = 0; i < cut; ++i) {
    const double a = static_cast<double>(i);
    const double b = a + 1.0;
    const auto il = static_cast<Eigen::Index>(i);
    const cplx eta_l = i == 0 ? eta0 : eta_factor(i) * psi[il];
    const cplx eta_r = eta_factor(i + 1) * psi[il + 1];
    for (int p = 1; p <= 2; ++p) {
      const double q = p * (alpha_ - 1.0);
      const double scale = std::pow(dt, q + 1.0);
      const double i1 = pow_diff(a, b, q + 1.0) / (q + 1.0);
      const double i2 = pow_diff(a, b, q + 2.0) / (q + 2.0);
      const double wl = scale * (b * i1 - i2);
      const double wr = scale * (i2 - a * i1);
      const cplx coef = p == 1 ? f.c1 : f.c2;
      const cplx el = p == 1 ? eta_l : eta_l * eta_l;
      const cplx er = p == 1 ? eta_r : eta_r * eta_r;
      acc += coef * (g[il] * el * wl + g[il + 1] * er * wr);
    }
  }
  for (std::size_t i = cut; i < n; ++i) {
    const auto il = static_cast<Eigen::Index>(i);
    const cplx zl = psi[il];
    const cplx zr = psi[il + 1];
    acc += 0.5 * dt * (g[il] * zl * (f.c1 + f.c2 * zl) + g[il + 1] * zr * (f.c1 + f.c2 * zr));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Kernel-form solver

RiccatiSolution solve_riccati_volterra(const KernelSpec& k, const ModelParams& m, const ExponentTriple& e, double T,
                                       std::size_t n, const RiccatiOptions& opts) {
  if (n < 2) throw ArgumentError("solve_riccati_volterra: need n >= 2");
  m.validate();
  RiccatiSolution sol{UniformGrid(T, n), {}, {}, "volterra", k, m, e, false, {0.0, 0.0}, {}};
  if (!e.in_validated_domain()) sol.warnings.emplace_back("exponent outside the validated domain");

  const Quadratic rhs = riccati_volterra_rhs(m, e);
  const bool singular = k.singular_at_origin() && e.v != cplx(0.0, 0.0);
  const RiccatiQuadrature rule(k, sol.grid, singular, opts.singular_cells);
  const auto pts = static_cast<Eigen::Index>(sol.grid.points());
  const double dt = sol.grid.dt();

  sol.psi = ComplexVector::Zero(pts);
  if (singular) {
    const auto& pl = std::get<PowerLaw>(k.variant());
    sol.singular_origin = true;
    sol.eta0 = e.v * pl.scale / gamma_fn(pl.alpha);
    sol.psi[0] = e.v * k.cell_moments(0.0, dt).first / dt;
  } else if (e.v != cplx(0.0, 0.0)) {
    sol.psi[0] = e.v * k(0.0);
  }

  for (std::size_t j = 1; j < sol.grid.points(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double t = sol.grid.time(j);
    cplx base = rule.history(rhs, sol.psi, sol.eta0, j);
    if (e.v != cplx(0.0, 0.0)) base += e.v * k(t);

    cplx guess;
    if (singular) {
      const cplx eta_prev = j == 1 ? sol.eta0 : rule.eta_factor(j - 1) * sol.psi[jj - 1];
      guess = eta_prev / rule.eta_factor(j);
    } else {
      guess = j >= 2 ? 2.0 * sol.psi[jj - 1] - sol.psi[jj - 2] : sol.psi[jj - 1];
    }

    // current(z) = A z + B z^2, so the implicit step is a scalar quadratic
    // solved by Newton from the predictor.
    const cplx cp = rule.current(rhs, 1.0, j);
    const cplx cm = rule.current(rhs, -1.0, j);
    const cplx A = 0.5 * (cp - cm);
    const cplx B = 0.5 * (cp + cm);
    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
      const cplx residual = guess - base - guess * (A + B * guess);
      const cplx slope = 1.0 - A - 2.0 * B * guess;
      const cplx next = guess - residual / slope;
      check_finite(next, opts.blowup, j, "volterra");
      const double change = std::abs(next - guess);
      guess = next;
      if (change <= opts.tolerance * std::max(1.0, std::abs(next))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericalError("volterra: corrector did not converge", j, "volterra");
    sol.psi[jj] = guess;
  }

  sol.q_of_psi.resize(pts);
  for (Eigen::Index j = 0; j < pts; ++j) sol.q_of_psi[j] = Q(m, e.u, sol.psi[j]);
  return sol;
}

// ---------------------------------------------------------------------------
// Fractional Adams

RiccatiSolution solve_fractional_riccati(double alpha, const ModelParams& m, cplx u, double T, std::size_t n,
                                         const RiccatiOptions& opts, double scale) {
  if (n < 2) throw ArgumentError("solve_fractional_riccati: need n >= 2");
  const KernelSpec k = KernelSpec::power_law(alpha, scale);
  const ExponentTriple e{u, {0.0, 0.0}, {0.0, 0.0}};
  RiccatiSolution sol{UniformGrid(T, n), {}, {}, "fractional", k, m, e, false, {0.0, 0.0}, {}};
  if (!e.in_validated_domain()) sol.warnings.emplace_back("exponent outside the validated domain");

  const Quadratic rhs = riccati_volterra_rhs(m, e);
  const auto pts = static_cast<Eigen::Index>(sol.grid.points());
  const double dt = sol.grid.dt();
  const double pred_scale = scale * std::pow(dt, alpha) / gamma_fn(alpha + 1.0);
  const double corr_scale = scale * std::pow(dt, alpha) / gamma_fn(alpha + 2.0);

  // b[m] = (m+1)^alpha - m^alpha; interior corrector weights c[m] for m = j - i >= 1.
  RealVector b(pts), c(pts + 1);
  for (Eigen::Index i = 0; i < pts; ++i) b[i] = std::pow(i + 1.0, alpha) - std::pow(static_cast<double>(i), alpha);
  c[0] = 1.0;
  for (Eigen::Index i = 1; i <= pts; ++i)
    c[i] = std::pow(i + 1.0, alpha + 1.0) + std::pow(i - 1.0, alpha + 1.0) - 2.0 * std::pow(static_cast<double>(i), alpha + 1.0);

  sol.psi = ComplexVector::Zero(pts);
  ComplexVector f = ComplexVector::Zero(pts);
  f[0] = rhs(0.0);
  for (Eigen::Index j = 0; j + 1 < pts; ++j) {
    // step to j+1 from samples 0..j
    cplx pred = 0.0;
    for (Eigen::Index i = 0; i <= j; ++i) pred += b[j - i] * f[i];
    pred *= pred_scale;

    const double jd = static_cast<double>(j);
    cplx hist = (std::pow(jd, alpha + 1.0) - (jd - alpha) * std::pow(jd + 1.0, alpha)) * f[0];
    for (Eigen::Index i = 1; i <= j; ++i) hist += c[j - i + 1] * f[i];

    cplx value = pred;
    for (int pass = 0; pass < std::max(1, opts.adams_corrections); ++pass) value = corr_scale * (rhs(value) + hist);
    check_finite(value, opts.blowup, static_cast<std::size_t>(j + 1), "fractional");
    sol.psi[j + 1] = value;
    f[j + 1] = rhs(value);
  }

  sol.q_of_psi.resize(pts);
  for (Eigen::Index j = 0; j < pts; ++j) sol.q_of_psi[j] = Q(m, u, sol.psi[j]);
  return sol;
}

// ---------------------------------------------------------------------------
// Convolution Riccati

ConvolutionRiccatiSolution solve_convolution_riccati(const KernelSpec& k, const ModelParams& m, cplx u, double T,
                                                     std::size_t n, const RiccatiOptions& opts) {
  if (n < 2) throw ArgumentError("solve_convolution_riccati: need n >= 2");
  const ScaledResolvent rho(k, m.lambda, T, n);
  const ProductWeights& w = rho.weights();
  const Quadratic q = riccati_q_map(m, u);
  const auto pts = static_cast<Eigen::Index>(rho.grid().points());

  ConvolutionRiccatiSolution out{rho.grid(), ComplexVector::Zero(pts), ComplexVector::Zero(pts)};
  out.g[0] = q(0.0);
  for (Eigen::Index j = 1; j < pts; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    const cplx hist = convolution_history(w, out.g, jj);
    cplx g = out.g[j - 1];
    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
      const cplx next = q(hist + w.node[0] * g);
      check_finite(next, opts.blowup, jj, "convolution");
      const double change = std::abs(next - g);
      g = next;
      if (change <= opts.tolerance * std::max(1.0, std::abs(next))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw NumericalError("convolution: fixed point did not converge", jj, "convolution");
    out.g[j] = g;
    out.psi[j] = hist + w.node[0] * g;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lift

namespace {

// phi_k(z) = sum_m z^m / (m + k)!
void phi_functions(double z, double& p1, double& p2, double& p3) {
  if (std::abs(z) < 0.5) {
    p1 = p2 = p3 = 0.0;
    double term = 1.0;  // z^m / m!
    for (int m = 0; m < 25; ++m) {
      p1 += term / (m + 1);
      p2 += term / ((m + 1.0) * (m + 2.0));
      p3 += term / ((m + 1.0) * (m + 2.0) * (m + 3.0));
      term *= z / (m + 1);
    }
    return;
  }
  const double em1 = std::expm1(z);
  p1 = em1 / z;
  p2 = (em1 - z) / (z * z);
  p3 = (em1 - z - 0.5 * z * z) / (z * z * z);
}

}  // namespace

LiftRiccatiSolution solve_lift_riccati(const Atoms& atoms, const ModelParams& m, const ComplexVector& h, double T,
                                       std::size_t n, cplx u, const RiccatiOptions& opts) {
  if (atoms.size() == 0) throw ArgumentError("solve_lift_riccati: need at least one atom");
  if (static_cast<std::size_t>(h.size()) != atoms.size())
    throw ArgumentError("solve_lift_riccati: one initial value per atom required");
  if (n < 1) throw ArgumentError("solve_lift_riccati: need n >= 1");

  LiftRiccatiSolution sol{atoms, UniformGrid(T, n), {}, {}, {}};
  const auto na = static_cast<Eigen::Index>(atoms.size());
  const auto pts = static_cast<Eigen::Index>(sol.grid.points());
  const double dt = sol.grid.dt();
  const Quadratic rhs = lift_rhs(m, u);
  const Quadratic rphi{0.0, m.beta, 0.5 * m.alpha0};
  const Eigen::VectorXcd weights = atoms.weights.cast<cplx>();

  struct Coefficients {
    double h;
    Eigen::ArrayXd decay, half_decay, half_gain, f1, f2, f3;
  };
  auto coefficients = [&](double h) {
    Coefficients c{h, Eigen::ArrayXd(na), Eigen::ArrayXd(na), Eigen::ArrayXd(na),
                   Eigen::ArrayXd(na), Eigen::ArrayXd(na), Eigen::ArrayXd(na)};
    for (Eigen::Index i = 0; i < na; ++i) {
      const double z = -atoms.rates[i] * h;
      double p1, p2, p3, h1, h2, h3;
      phi_functions(z, p1, p2, p3);
      phi_functions(0.5 * z, h1, h2, h3);
      c.decay[i] = std::exp(z);
      c.half_decay[i] = std::exp(0.5 * z);
      c.half_gain[i] = 0.5 * h * h1;
      c.f1[i] = h * (p1 - 3.0 * p2 + 4.0 * p3);
      c.f2[i] = h * (p2 - 2.0 * p3);
      c.f3[i] = h * (-p2 + 4.0 * p3);
    }
    return c;
  };

  Eigen::ArrayXcd state = h.array();
  auto reduce = [&](const Eigen::ArrayXcd& s) { return (weights.array() * s).sum(); };
  // One ETDRK4 step; returns the increment of phi.
  auto advance = [&](const Coefficients& c) {
    const cplx y0 = reduce(state);
    const cplx n0 = rhs(y0);
    const Eigen::ArrayXcd a = c.half_decay * state + c.half_gain * n0;
    const cplx ya = reduce(a);
    const cplx na_ = rhs(ya);
    const Eigen::ArrayXcd b = c.half_decay * state + c.half_gain * na_;
    const cplx yb = reduce(b);
    const cplx nb = rhs(yb);
    const Eigen::ArrayXcd d = c.half_decay * a + c.half_gain * (2.0 * nb - n0);
    const cplx yc = reduce(d);
    const cplx nc = rhs(yc);
    state = c.decay * state + c.f1 * n0 + 2.0 * c.f2 * (na_ + nb) + c.f3 * nc;
    return c.h / 6.0 * (rphi(y0) + 2.0 * rphi(ya) + 2.0 * rphi(yb) + rphi(yc));
  };

  sol.Psi.resize(na, pts);
  sol.phi = ComplexVector::Zero(pts);
  sol.psi_reduced = ComplexVector::Zero(pts);
  sol.Psi.col(0) = state.matrix();
  sol.psi_reduced[0] = reduce(state);

  // Fast atoms make psi vary on the scale 1 / max rate near the origin, so the
  // first step is split geometrically down to that scale.
  const double fastest = atoms.rates.size() > 0 ? atoms.rates.cwiseAbs().maxCoeff() : 0.0;
  const int levels = std::clamp(static_cast<int>(std::ceil(std::log2(std::max(1.0, fastest * dt)))), 0, 60);
  const Coefficients regular = coefficients(dt);
  for (Eigen::Index j = 0; j + 1 < pts; ++j) {
    if (j == 0 && levels > 0) {
      cplx inc = advance(coefficients(std::ldexp(dt, -levels)));
      for (int k = levels; k >= 1; --k) inc += advance(coefficients(std::ldexp(dt, -k)));
      sol.phi[1] = inc;
    } else {
      sol.phi[j + 1] = sol.phi[j] + advance(regular);
    }
    const cplx y1 = reduce(state);
    check_finite(y1, opts.blowup, static_cast<std::size_t>(j + 1), "lift");
    sol.Psi.col(j + 1) = state.matrix();
    sol.psi_reduced[j + 1] = y1;
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Mild dual

SpdeDual::SpdeDual(const KernelSpec& k, const ModelParams& m, RiccatiSolution sol, cplx v)
    : kernel_(k), model_(m), sol_(std::move(sol)), v_(v), rule_(k, sol_.grid, sol_.singular_origin) {
  if (sol_.exponent.u != cplx(0.0, 0.0) || sol_.exponent.w != cplx(0.0, 0.0))
    throw ArgumentError("reconstruct_spde_psi: solution must have u = w = 0");
  if (sol_.exponent.v != v) throw ArgumentError("reconstruct_spde_psi: v does not match the solution");
}

cplx SpdeDual::Psi(std::size_t j, std::size_t i) const {
  if (i >= j) throw ArgumentError("SpdeDual::Psi defined for x < t only");
  return R_Psi(model_, sol_.psi[static_cast<Eigen::Index>(j - i)]);
}

cplx SpdeDual::reconstructed_psi(std::size_t j) const {
  const Quadratic r_psi{0.0, -model_.lambda, 0.5 * model_.a};
  cplx out = rule_.convolve(r_psi, sol_.psi, sol_.eta0, j);
  if (v_ != cplx(0.0, 0.0)) out += v_ * kernel_(sol_.grid.time(j));
  return out;
}

double SpdeDual::identity_residual() const {
  double worst = 0.0;
  for (std::size_t j = 1; j < sol_.grid.points(); ++j)
    worst = std::max(worst, std::abs(sol_.psi[static_cast<Eigen::Index>(j)] - reconstructed_psi(j)));
  return worst;
}

SpdeDual reconstruct_spde_psi(const KernelSpec& k, const ModelParams& m, const RiccatiSolution& sol, cplx v) {
  return SpdeDual(k, m, sol, v);
}

}  // namespace affvol
