#include "affvol/resolvent.hpp"

#include <cmath>
#include <limits>

#include "affvol/special_functions.hpp"

namespace affvol {

std::optional<std::function<double(double)>> resolvent_analytic(const KernelSpec& k, double lambda) {
  if (lambda == 0.0) return std::function<double(double)>([](double) { return 0.0; });
  if (const auto* c = std::get_if<ConstantKernel>(&k.variant())) {
    const double rate = lambda * c->c;
    return std::function<double(double)>([rate](double t) { return rate * std::exp(-rate * t); });
  }
  if (const auto* p = std::get_if<PowerLaw>(&k.variant())) {
    const double a = p->alpha;
    const double rate = lambda * p->scale;
    const MLParams ml{a, a};
    return std::function<double(double)>([=](double t) {
      if (!(t > 0.0) && a < 1.0) throw DomainError("power-law resolvent is singular at t <= 0");
      return rate * std::pow(t, a - 1.0) * mittag_leffler(ml, -rate * std::pow(t, a));
    });
  }
  return std::nullopt;
}

std::optional<std::function<double(double)>> resolvent_analytic_cumulative(const KernelSpec& k, double lambda) {
  if (lambda == 0.0) return std::function<double(double)>([](double) { return 0.0; });
  if (const auto* c = std::get_if<ConstantKernel>(&k.variant())) {
    const double rate = lambda * c->c;
    return std::function<double(double)>([rate](double t) { return -std::expm1(-rate * t); });
  }
  if (const auto* p = std::get_if<PowerLaw>(&k.variant())) {
    const double a = p->alpha;
    const double rate = lambda * p->scale;
    const MLParams ml{a, a + 1.0};
    return std::function<double(double)>([=](double t) {
      if (t <= 0.0) return 0.0;
      const double ta = std::pow(t, a);
      return rate * ta * mittag_leffler(ml, -rate * ta);
    });
  }
  return std::nullopt;
}

ResolventTable resolvent_table_analytic(const KernelSpec& k, double lambda, double T, std::size_t n) {
  auto r = resolvent_analytic(k, lambda);
  auto c = resolvent_analytic_cumulative(k, lambda);
  if (!r || !c) throw ArgumentError("no closed-form resolvent for this kernel");
  ResolventTable tbl{k, lambda, UniformGrid(T, n), {}, {}, "analytic"};
  const auto pts = static_cast<Eigen::Index>(tbl.grid.points());
  tbl.samples.resize(pts);
  tbl.cumulative.resize(pts);
  for (Eigen::Index j = 0; j < pts; ++j) {
    const double t = tbl.grid.time(static_cast<std::size_t>(j));
    tbl.cumulative[j] = (*c)(t);
  }
  tbl.samples[0] = k.singular_at_origin() && lambda != 0.0 ? tbl.cumulative[1] / tbl.grid.dt() : (*r)(0.0);
  for (Eigen::Index j = 1; j < pts; ++j) tbl.samples[j] = (*r)(tbl.grid.time(static_cast<std::size_t>(j)));
  return tbl;
}

namespace {

// lambda (K * dC)(t_j) with C piecewise linear: the increments carry the
// exact cell integrals of K.
double increment_convolution(const ProductWeights& w, const RealVector& cumulative, std::size_t j) {
  double acc = 0.0;
  for (std::size_t i = 0; i < j; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    acc += (cumulative[ii + 1] - cumulative[ii]) * w.first[static_cast<Eigen::Index>(j - i - 1)];
  }
  return acc / w.dt;
}

}  // namespace

ResolventTable resolvent_numeric(const KernelSpec& k, double lambda, double T, std::size_t n) {
  if (n < 2) throw ArgumentError("resolvent_numeric: need n >= 2");
  if (lambda < 0.0) throw ArgumentError("resolvent_numeric: lambda must be nonnegative");
  ResolventTable tbl{k, lambda, UniformGrid(T, n), {}, {}, "product-integration"};
  const auto pts = static_cast<Eigen::Index>(tbl.grid.points());
  tbl.samples = RealVector::Zero(pts);
  tbl.cumulative = RealVector::Zero(pts);
  if (lambda == 0.0) return tbl;

  const ProductWeights w(k, tbl.grid);
  const double diag = 1.0 + lambda * w.node[0];
  for (std::size_t j = 1; j < tbl.grid.points(); ++j) {
    const double k1 = k.cumulative(tbl.grid.time(j));
    const double c = (lambda * k1 - lambda * convolution_history(w, tbl.cumulative, j)) / diag;
    if (!std::isfinite(c)) throw NumericalError("resolvent recursion produced a non-finite value", j, "resolvent");
    tbl.cumulative[static_cast<Eigen::Index>(j)] = c;
  }

  const double dt = tbl.grid.dt();
  tbl.samples[0] = k.singular_at_origin() ? tbl.cumulative[1] / dt : lambda * k(0.0);
  for (std::size_t j = 1; j < tbl.grid.points(); ++j) {
    const double r = lambda * k(tbl.grid.time(j)) - lambda * increment_convolution(w, tbl.cumulative, j);
    if (!std::isfinite(r)) throw NumericalError("resolvent recursion produced a non-finite value", j, "resolvent");
    tbl.samples[static_cast<Eigen::Index>(j)] = r;
  }
  return tbl;
}

double resolvent_residual(const ResolventTable& tbl) {
  if (tbl.lambda == 0.0) return tbl.samples.cwiseAbs().maxCoeff();
  const ProductWeights w(tbl.kernel, tbl.grid);
  double worst = 0.0;
  if (!tbl.kernel.singular_at_origin()) worst = std::abs(tbl.lambda * tbl.kernel(0.0) - tbl.samples[0]);
  for (std::size_t j = 1; j < tbl.grid.points(); ++j) {
    const double lhs = tbl.lambda * tbl.kernel(tbl.grid.time(j)) - tbl.samples[static_cast<Eigen::Index>(j)];
    const double rhs = tbl.lambda * increment_convolution(w, tbl.cumulative, j);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

ScaledResolvent::ScaledResolvent(const KernelSpec& k, double lambda, double T, std::size_t n)
    : kernel_(k), lambda_(lambda), grid_(T, n) {
  const auto pts = static_cast<Eigen::Index>(grid_.points());
  const auto cells = pts - 1;
  const double dt = grid_.dt();
  if (lambda == 0.0) {
    weights_ = ProductWeights(k, grid_);
    values_.resize(pts);
    cumulative_.resize(pts);
    for (Eigen::Index j = 0; j < pts; ++j) {
      const double t = grid_.time(static_cast<std::size_t>(j));
      values_[j] = j == 0 && k.singular_at_origin() ? weights_.first[0] / dt : k(t);
      cumulative_[j] = k.cumulative(t);
    }
    return;
  }
  const ResolventTable tbl = resolvent_numeric(k, lambda, T, n);
  values_ = tbl.samples / lambda;
  cumulative_ = tbl.cumulative / lambda;
  RealVector first(cells), second(cells);
  for (Eigen::Index m = 0; m < cells; ++m) {
    first[m] = cumulative_[m + 1] - cumulative_[m];
    // int_cell (tau - lo) rho = dt G(hi) - int_cell G, with G integrated by
    // cubic Hermite interpolation (G' = rho at the nodes).
    const double int_g = 0.5 * dt * (cumulative_[m] + cumulative_[m + 1]) + dt * dt * (values_[m] - values_[m + 1]) / 12.0;
    second[m] = (dt * cumulative_[m + 1] - dt * cumulative_[m] - (int_g - dt * cumulative_[m])) / dt;
  }
  if (k.singular_at_origin()) {
    const auto [k0, k1] = k.cell_moments(0.0, dt);
    second[0] = first[0] * k1 / k0;
  }
  weights_ = ProductWeights(first, second, dt);
}

double ScaledResolvent::value(std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }
double ScaledResolvent::cumulative(std::size_t j) const { return cumulative_[static_cast<Eigen::Index>(j)]; }

}  // namespace affvol
