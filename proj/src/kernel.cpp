#include "affvol/kernel.hpp"

#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "affvol/special_functions.hpp"

namespace affvol {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// int_0^dt exp(-x s) ds and int_0^dt s exp(-x s) ds, stable for small x dt.
std::pair<double, double> exp_cell(double x, double dt) {
  const double z = x * dt;
  if (std::abs(z) < 1e-3) {
    const double i0 = dt * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
    const double i1 = dt * dt * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0);
    return {i0, i1};
  }
  const double e = std::exp(-z);
  return {-std::expm1(-z) / x, (1.0 - e * (1.0 + z)) / (x * x)};
}

// hi^p - lo^p without cancellation for hi close to lo.
double power_difference(double lo, double hi, double p) {
  if (lo <= 0.0) return std::pow(hi, p);
  return std::pow(lo, p) * std::expm1(p * std::log1p((hi - lo) / lo));
}

}  // namespace

KernelSpec KernelSpec::power_law(double alpha, double scale) {
  if (!(alpha > 0.5) || alpha > 1.0) throw ArgumentError("power-law kernel requires alpha in (1/2, 1]");
  return KernelSpec(PowerLaw{alpha, scale}, 2.0 * alpha - 1.0);
}

KernelSpec KernelSpec::constant(double c) { return KernelSpec(ConstantKernel{c}, 1.0); }

KernelSpec KernelSpec::exponential_sum(RealVector weights, RealVector rates) {
  if (weights.size() != rates.size() || weights.size() == 0)
    throw ArgumentError("exponential-sum kernel needs matching, non-empty weight and rate lists");
  if ((rates.array() < 0.0).any()) throw ArgumentError("exponential-sum rates must be nonnegative");
  return KernelSpec(ExponentialSum{std::move(weights), std::move(rates)}, 1.0);
}

bool KernelSpec::singular_at_origin() const {
  const auto* p = std::get_if<PowerLaw>(&variant_);
  return p != nullptr && p->alpha < 1.0;
}

double KernelSpec::operator()(double t) const {
  return std::visit(
      Overloaded{
          [t](const PowerLaw& p) {
            if (p.alpha < 1.0 && !(t > 0.0)) throw DomainError("power-law kernel is singular at t <= 0");
            if (t < 0.0) throw DomainError("kernel evaluated at negative time");
            return p.scale * std::pow(t, p.alpha - 1.0) / gamma_fn(p.alpha);
          },
          [t](const ConstantKernel& c) {
            if (t < 0.0) throw DomainError("kernel evaluated at negative time");
            return c.c;
          },
          [t](const ExponentialSum& e) {
            if (t < 0.0) throw DomainError("kernel evaluated at negative time");
            return (e.weights.array() * (-e.rates.array() * t).exp()).sum();
          },
      },
      variant_);
}

double KernelSpec::cumulative(double t) const {
  if (t <= 0.0) return 0.0;
  return cell_moments(0.0, t).first;
}

double KernelSpec::square_mass(double h) const {
  if (h <= 0.0) return 0.0;
  return std::visit(
      Overloaded{
          [h](const PowerLaw& p) {
            const double g = gamma_fn(p.alpha);
            return p.scale * p.scale * std::pow(h, 2.0 * p.alpha - 1.0) / ((2.0 * p.alpha - 1.0) * g * g);
          },
          [h](const ConstantKernel& c) { return c.c * c.c * h; },
          [h](const ExponentialSum& e) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < e.weights.size(); ++i)
              for (Eigen::Index j = 0; j < e.weights.size(); ++j)
                acc += e.weights[i] * e.weights[j] * exp_cell(e.rates[i] + e.rates[j], h).first;
            return acc;
          },
      },
      variant_);
}

std::pair<double, double> KernelSpec::cell_moments(double lo, double hi) const {
  const double width = hi - lo;
  return std::visit(
      Overloaded{
          [=](const PowerLaw& p) {
            const double a = p.alpha;
            const double g = gamma_fn(a);
            const double m0 = p.scale * power_difference(lo, hi, a) / (a * g);
            // int (tau - lo) tau^(a-1) = (hi^(a+1) - lo^(a+1))/(a+1) - lo (hi^a - lo^a)/a
            const double raw = power_difference(lo, hi, a + 1.0) / (a + 1.0) - lo * power_difference(lo, hi, a) / a;
            return std::pair{m0, p.scale * raw / (g * width)};
          },
          [=](const ConstantKernel& c) { return std::pair{c.c * width, 0.5 * c.c * width}; },
          [=](const ExponentialSum& e) {
            double m0 = 0.0;
            double m1 = 0.0;
            for (Eigen::Index i = 0; i < e.weights.size(); ++i) {
              const auto [i0, i1] = exp_cell(e.rates[i], width);
              const double shift = e.weights[i] * std::exp(-e.rates[i] * lo);
              m0 += shift * i0;
              m1 += shift * i1;
            }
            return std::pair{m0, m1 / width};
          },
      },
      variant_);
}

double kernel_eval(const KernelSpec& k, double t) { return k(t); }

LaplaceMeasure measure_of(const KernelSpec& k) {
  return std::visit(
      Overloaded{
          [](const PowerLaw& p) -> LaplaceMeasure {
            if (p.alpha == 1.0) return DiracAtZero{p.scale};
            return RoughDensity{p.alpha, p.scale};
          },
          [](const ConstantKernel& c) -> LaplaceMeasure { return DiracAtZero{c.c}; },
          [](const ExponentialSum& e) -> LaplaceMeasure { return Atoms{e.weights, e.rates}; },
      },
      k.variant());
}

double laplace_transform(const LaplaceMeasure& m, double t) {
  return std::visit(
      Overloaded{
          [](const DiracAtZero& d) { return d.mass; },
          [t](const RoughDensity& r) {
            if (!(t > 0.0)) throw DomainError("rough Laplace transform needs t > 0");
            const double norm = r.scale / (gamma_fn(r.alpha) * gamma_fn(1.0 - r.alpha));
            boost::math::quadrature::exp_sinh<double> integrator;
            const double v =
                integrator.integrate([&](double x) { return x > 0.0 ? std::exp(-x * t) * std::pow(x, -r.alpha) : 0.0; }, 1e-13);
            return norm * v;
          },
          [t](const Atoms& a) { return (a.weights.array() * (-a.rates.array() * t).exp()).sum(); },
      },
      m);
}

Atoms discretize_measure(const LaplaceMeasure& m, std::size_t n, double x_max, const MeasureGridOptions& opts) {
  if (n == 0) throw ArgumentError("discretize_measure: need at least one atom");
  return std::visit(
      Overloaded{
          [](const DiracAtZero& d) {
            Atoms out;
            out.weights = RealVector::Constant(1, d.mass);
            out.rates = RealVector::Zero(1);
            return out;
          },
          [](const Atoms& a) { return a; },
          [&](const RoughDensity& r) {
            if (!(x_max > 0.0)) throw ArgumentError("discretize_measure: x_max must be positive");
            if (n > 1 && !(opts.first_edge > 0.0 && opts.first_edge < x_max))
              throw ArgumentError("discretize_measure: first_edge must lie in (0, x_max)");
            RealVector edges(static_cast<Eigen::Index>(n + 1));
            edges[0] = 0.0;
            if (n == 1) {
              edges[1] = x_max;
            } else {
              const double ratio = std::pow(opts.first_edge / x_max, 1.0 / static_cast<double>(n - 1));
              for (std::size_t k = 1; k <= n; ++k) edges[static_cast<Eigen::Index>(k)] = x_max * std::pow(ratio, static_cast<double>(n - k));
            }
            const double a = r.alpha;
            const double norm = r.scale / (gamma_fn(a) * gamma_fn(1.0 - a));
            Atoms out;
            out.weights.resize(static_cast<Eigen::Index>(n));
            out.rates.resize(static_cast<Eigen::Index>(n));
            for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
              const double lo = edges[k];
              const double hi = edges[k + 1];
              const double mass = norm * power_difference(lo, hi, 1.0 - a) / (1.0 - a);
              const double first = norm * power_difference(lo, hi, 2.0 - a) / (2.0 - a);
              out.weights[k] = mass;
              out.rates[k] = first / mass;
            }
            return out;
          },
      },
      m);
}

KernelSpec kernel_from_atoms(const Atoms& atoms) { return KernelSpec::exponential_sum(atoms.weights, atoms.rates); }

ProductWeights::ProductWeights(const KernelSpec& k, const UniformGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.steps);
  dt = grid.dt();
  first.resize(n);
  second.resize(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const auto [m0, m1] = k.cell_moments(static_cast<double>(m) * dt, static_cast<double>(m + 1) * dt);
    first[m] = m0;
    second[m] = m1;
  }
  *this = ProductWeights(first, second, dt);
}

ProductWeights::ProductWeights(RealVector first_moments, RealVector second_moments, double step)
    : first(std::move(first_moments)), second(std::move(second_moments)), dt(step) {
  const Eigen::Index n = first.size();
  node.resize(n);
  if (n == 0) return;
  node[0] = first[0] - second[0];
  for (Eigen::Index m = 1; m < n; ++m) node[m] = second[m - 1] + first[m] - second[m];
}

RealVector fractional_integral(double alpha, const RealVector& f, double dt) {
  if (!(alpha > 0.0) || alpha > 1.0) throw ArgumentError("fractional order must lie in (0, 1]");
  if (f.size() < 2) throw ArgumentError("fractional_integral needs at least two samples");
  if (!f.allFinite()) throw ArgumentError("fractional_integral: samples must be finite");
  // Moments of t^(alpha-1)/Gamma(alpha) in closed form; alpha <= 1/2 allowed here.
  const auto n = f.size() - 1;
  RealVector m0(n), m1(n);
  const double g = gamma_fn(alpha);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double lo = static_cast<double>(m) * dt;
    const double hi = lo + dt;
    m0[m] = power_difference(lo, hi, alpha) / (alpha * g);
    m1[m] = (power_difference(lo, hi, alpha + 1.0) / (alpha + 1.0) - lo * power_difference(lo, hi, alpha) / alpha) / (g * dt);
  }
  return convolve<double>(ProductWeights(m0, m1, dt), f);
}

RealVector fractional_derivative(double alpha, const RealVector& f, double dt) {
  if (!(alpha > 0.0) || alpha > 1.0) throw ArgumentError("fractional order must lie in (0, 1]");
  if (f.size() < 3) throw ArgumentError("fractional_derivative needs at least three samples");
  const RealVector g = alpha == 1.0 ? f : fractional_integral(1.0 - alpha, f, dt);
  const Eigen::Index n = g.size();
  RealVector d(n);
  d[0] = (g[1] - g[0]) / dt;
  d[n - 1] = (g[n - 1] - g[n - 2]) / dt;
  for (Eigen::Index j = 1; j + 1 < n; ++j) d[j] = (g[j + 1] - g[j - 1]) / (2.0 * dt);
  return d;
}

}  // namespace affvol
