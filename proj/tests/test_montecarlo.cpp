#include <cmath>

#include "affvol/errors.hpp"
#include "affvol/montecarlo.hpp"
#include "affvol/transforms.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace affvol;

namespace {

struct Stats {
  double mean, mean_se, var, var_se;
};

Stats stats(const RealVector& x) {
  const double n = static_cast<double>(x.size());
  const double mean = x.mean();
  const RealVector c = x.array() - mean;
  const double m2 = c.squaredNorm() / n;
  const double m4 = c.array().pow(4).sum() / n;
  return {mean, std::sqrt(m2 / n), m2 * n / (n - 1.0), std::sqrt((m4 - m2 * m2) / n)};
}

ModelParams cir() { return ModelParams::heston(2.0, 0.04, 0.3, -0.7, 0.05, 0.0); }

}  // namespace

TEST_SUITE("montecarlo") {
  TEST_CASE("counter-based normals are reproducible and standard") {
    CHECK(counter_normal(1, 2, 3, 0) == counter_normal(1, 2, 3, 0));
    CHECK(counter_normal(1, 2, 3, 0) != counter_normal(1, 2, 3, 1));
    CHECK(counter_normal(1, 2, 3, 0) != counter_normal(2, 2, 3, 0));
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = counter_normal(5, static_cast<std::uint64_t>(i), 7, 0);
      s += z;
      s2 += z * z;
    }
    CHECK(std::abs(s / n) < 3.0 / std::sqrt(n) * 1.5);
    CHECK(std::abs(s2 / n - 1.0) < 3.0 * std::sqrt(2.0 / n) * 1.5);
  }

  TEST_CASE("zero noise reproduces the deterministic Volterra solution") {
    const KernelSpec k = KernelSpec::power_law(0.6);
    ModelParams m;
    m.beta = 0.1;
    m.lambda = 0.7;
    m.V0 = 0.04;
    SimulationOptions opts;
    opts.store_paths = true;
    const PathSet p = simulate_volterra(k, m, 1.0, 200, 3, 1, opts);
    const ProductWeights w(k, p.grid);
    RealVector V(201);
    V[0] = m.V0;
    for (Eigen::Index j = 1; j <= 200; ++j) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < j; ++i) acc += w.first[j - 1 - i] * (m.beta - m.lambda * V[i]);
      V[j] = m.V0 + acc;
    }
    for (Eigen::Index r = 0; r < 3; ++r)
      for (Eigen::Index j = 0; j <= 200; ++j) CHECK(std::abs(p.V(r, j) - V[j]) <= 1e-15);
    ModelParams still;
    still.V0 = 0.04;
    CHECK_THROWS_AS(holder_estimate(simulate_volterra(k, still, 1.0, 64, 1000, 1, opts), {1.0 / 64, 2.0 / 64, 4.0 / 64}),
                    NumericalError);
  }

  TEST_CASE("constant kernel: CIR mean") {
    const ModelParams m = cir();
    const PathSet p = simulate_volterra(KernelSpec::constant(1.0), m, 1.0, 500, 100000, 3);
    const MCEstimate mean = mc_mean_terminal(p);
    CHECK(std::abs(mean.value.real() - oracle::cir_mean(2.0, 0.04, 0.05, 1.0)) < 3.0 * mean.standard_error);
  }

  TEST_CASE("rough kernel: mean of V_T is the forward variance") {
    const KernelSpec k = KernelSpec::power_law(0.6);
    const ModelParams m = ModelParams::heston(0.3, 0.05, 0.3, -0.7, 0.04, 0.0);
    const PathSet p = simulate_volterra(k, m, 1.0, 200, 40000, 5);
    const MCEstimate mean = mc_mean_terminal(p);
    const ForwardCurve fc = forward_curve(k, m, 1.0, 1000);
    CHECK(std::abs(mean.value.real() - fc.xi0[1000]) < 3.0 * mean.standard_error);
    CHECK(p.V_T.minCoeff() >= 0.0);
  }

  TEST_CASE("exact Volterra OU sampling") {
    ModelParams m;
    m.alpha0 = 1.0;
    SimulationOptions opts;
    opts.store_paths = true;
    const PathSet p = simulate_volterra_ou(KernelSpec::power_law(0.6), m, 1.0, 50, 20000, 11, opts);
    CHECK(p.scheme == "ou-exact");
    const double g = oracle::lanczos_gamma(0.6);
    for (Eigen::Index j : {10, 25, 50}) {
      const double t = j / 50.0;
      const Stats s = stats(p.V.col(j));
      CHECK(std::abs(s.var - std::pow(t, 0.2) / (0.2 * g * g)) < 3.0 * s.var_se);
    }
    const PathSet b = simulate_volterra_ou(KernelSpec::constant(1.0), m, 1.0, 20, 20000, 12, opts);
    for (Eigen::Index j : {5, 20}) {
      const Stats s = stats(b.V.col(j));
      CHECK(std::abs(s.var - j / 20.0) < 3.0 * s.var_se);
    }
    ModelParams det;
    det.V0 = 0.3;
    det.beta = 0.2;
    const PathSet d = simulate_volterra_ou(KernelSpec::power_law(0.6), det, 1.0, 10, 5, 1, opts);
    for (Eigen::Index j = 0; j <= 10; ++j)
      CHECK(d.V(3, j) == doctest::Approx(0.3 + 0.2 * KernelSpec::power_law(0.6).cumulative(j / 10.0)).epsilon(1e-14));
    CHECK_THROWS_AS(simulate_volterra_ou(KernelSpec::constant(1.0), cir(), 1.0, 10, 10, 1), ArgumentError);
  }

  TEST_CASE("lift with one atom at zero is CIR") {
    const ModelParams m = cir();
    const Atoms one{RealVector::Ones(1), RealVector::Zero(1)};
    const PathSet p = simulate_lift(one, m, 1.0, 500, 100000, 21);
    const Stats s = stats(p.state_T);
    CHECK(std::abs(s.mean - oracle::cir_mean(2.0, 0.04, 0.05, 1.0)) < 3.0 * s.mean_se);
    CHECK(std::abs(s.var - oracle::cir_variance(2.0, 0.04, 0.3, 0.05, 1.0)) < 3.0 * s.var_se);

    ModelParams zero;
    const PathSet z = simulate_lift(discretize_measure(RoughDensity{0.6, 1.0}, 20, 1e6), zero, 1.0, 50, 10, 1);
    CHECK(z.V_T.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("constant-kernel Volterra and Dirac lift give the same moments") {
    const ModelParams m = cir();
    const PathSet v = simulate_volterra(KernelSpec::constant(1.0), m, 1.0, 200, 30000, 31);
    const PathSet l = simulate_lift(discretize_measure(DiracAtZero{1.0}, 1, 1e6), m, 1.0, 200, 30000, 32);
    const Stats a = stats(v.V_T), b = stats(l.V_T);
    CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.mean_se, b.mean_se));
    CHECK(std::abs(a.var - b.var) < 3.0 * std::hypot(a.var_se, b.var_se));
  }

  TEST_CASE("rough lift and Volterra schemes give the same moments") {
    const KernelSpec k = KernelSpec::power_law(0.6);
    const ModelParams m = ModelParams::heston(0.3, 0.05, 0.2, -0.7, 0.04, 0.0);
    const PathSet v = simulate_volterra(k, m, 1.0, 200, 20000, 41);
    const PathSet l = simulate_lift(discretize_measure(measure_of(k), 200, 1e6), m, 1.0, 200, 20000, 42);
    const Stats a = stats(v.V_T), b = stats(l.V_T);
    CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.mean_se, b.mean_se));
    CHECK(std::abs(a.var - b.var) < 3.0 * std::hypot(a.var_se, b.var_se));
  }

  TEST_CASE("paths are bit-identical across thread counts") {
    const KernelSpec k = KernelSpec::power_law(0.6);
    const ModelParams m = ModelParams::heston(0.3, 0.05, 0.3, -0.7, 0.04, 0.0);
    SimulationOptions a;
    a.threads = 1;
    a.with_price = true;
    a.store_paths = true;
    SimulationOptions b = a;
    b.threads = 3;
    b.batch = 7;
    const PathSet p = simulate_volterra(k, m, 1.0, 50, 100, 9, a);
    const PathSet q = simulate_volterra(k, m, 1.0, 50, 100, 9, b);
    CHECK(p.V == q.V);
    CHECK(p.L_T == q.L_T);
    CHECK(p.integrated_V == q.integrated_V);
    CHECK(p.truncated == q.truncated);
    const Atoms atoms = discretize_measure(measure_of(k), 30, 1e6);
    CHECK(simulate_lift(atoms, m, 1.0, 50, 100, 9, a).V == simulate_lift(atoms, m, 1.0, 50, 100, 9, b).V);
  }

  TEST_CASE("truncation becomes rarer as the step shrinks (constant kernel)") {
    const ModelParams m = ModelParams::heston(1.0, 0.04, 0.5, -0.7, 0.04, 0.0);
    double prev = 1.0;
    for (std::size_t n : {250, 500, 1000}) {
      const PathSet p = simulate_volterra(KernelSpec::constant(1.0), m, 1.0, n, 4000, 13);
      CHECK(p.truncation_fraction() > 0.0);
      CHECK(p.truncation_fraction() < prev);
      prev = p.truncation_fraction();
    }
  }

  TEST_CASE("Hoelder slopes") {
    SimulationOptions opts;
    opts.store_paths = true;
    const std::vector<double> lags{1.0 / 512, 1.0 / 256, 1.0 / 128, 1.0 / 64, 1.0 / 32};
    const PathSet c = simulate_volterra(KernelSpec::constant(1.0), cir(), 1.0, 512, 1000, 17, opts);
    CHECK(std::abs(holder_estimate(c, lags) - 1.0) < 0.1);
    ModelParams ou;
    ou.alpha0 = 0.01;
    ou.V0 = 0.04;
    const PathSet r = simulate_volterra_ou(KernelSpec::power_law(0.6), ou, 1.0, 512, 1000, 17, opts);
    CHECK(std::abs(holder_estimate(r, lags) - 0.2) < 0.1);

    CHECK_THROWS_AS(holder_estimate(c, {1.0 / 512, 1.0 / 256}), ArgumentError);
    CHECK_THROWS_AS(holder_estimate(c, {1.0 / 500, 1.0 / 256, 1.0 / 128}), ArgumentError);
    CHECK_THROWS_AS(holder_estimate(simulate_volterra(KernelSpec::constant(1.0), cir(), 1.0, 512, 10, 1), lags),
                    ArgumentError);
  }

  TEST_CASE("mc_transform identities") {
    const ModelParams m = ModelParams::heston(0.3, 0.05, 0.3, -0.7, 0.04, std::log(1.25));
    SimulationOptions opts;
    opts.with_price = true;
    const PathSet p = simulate_volterra(KernelSpec::power_law(0.6), m, 1.0, 100, 20000, 23, opts);
    const MCEstimate zero = mc_transform(p, ExponentTriple{});
    CHECK(zero.value == cplx(1.0, 0.0));
    CHECK(zero.standard_error == 0.0);
    const MCEstimate one = mc_transform(p, ExponentTriple{1.0, 0.0, 0.0});
    CHECK(std::abs(one.value - 1.25) < 3.0 * one.standard_error);

    const PathSet novol = simulate_volterra(KernelSpec::power_law(0.6), m, 1.0, 20, 10, 23);
    CHECK_THROWS_AS(mc_transform(novol, ExponentTriple{cplx(0.0, 1.0), 0.0, 0.0}), ArgumentError);
  }

  TEST_CASE("argument validation") {
    CHECK_THROWS_AS(simulate_volterra(KernelSpec::constant(1.0), cir(), 1.0, 0, 10, 1), ArgumentError);
    CHECK_THROWS_AS(simulate_volterra(KernelSpec::constant(1.0), cir(), -1.0, 10, 10, 1), ArgumentError);
    ModelParams bad = cir();
    bad.alpha0 = 0.1;
    CHECK_THROWS_AS(simulate_volterra(KernelSpec::constant(1.0), bad, 1.0, 10, 10, 1), ArgumentError);
  }
}
