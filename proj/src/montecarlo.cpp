#include "affvol/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <thread>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "affvol/errors.hpp"

namespace affvol {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double to_unit(std::uint64_t h) {
  // (0, 1]
  return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

struct BatchResult {
  RealVector V_T, state_T, L_T, integrated;
  Eigen::MatrixXd paths;
  std::size_t truncated = 0;
};

template <typename Fn>
void for_each_batch(std::size_t n_paths, const SimulationOptions& opts, Fn&& fn, PathSet& out) {
  const std::size_t batch = std::max<std::size_t>(1, opts.batch);
  const std::size_t n_batches = (n_paths + batch - 1) / batch;
  std::vector<BatchResult> results(n_batches);
  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n_batches)));
  auto work = [&](unsigned t) {
    for (std::size_t b = t; b < n_batches; b += threads) {
      const std::size_t first = b * batch;
      results[b] = fn(first, std::min(batch, n_paths - first));
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned t = 0; t < threads; ++t) jobs.push_back(std::async(std::launch::async, work, t));
    for (auto& j : jobs) j.get();
  }

  const auto np = static_cast<Eigen::Index>(n_paths);
  out.V_T.resize(np);
  out.state_T.resize(np);
  out.L_T.resize(out.has_price ? np : 0);
  out.integrated_V.resize(np);
  if (opts.store_paths) out.V.resize(np, static_cast<Eigen::Index>(out.grid.points()));
  for (std::size_t b = 0; b < n_batches; ++b) {
    const auto first = static_cast<Eigen::Index>(b * batch);
    const BatchResult& r = results[b];
    const Eigen::Index cnt = r.V_T.size();
    out.V_T.segment(first, cnt) = r.V_T;
    out.state_T.segment(first, cnt) = r.state_T;
    out.integrated_V.segment(first, cnt) = r.integrated;
    if (out.has_price) out.L_T.segment(first, cnt) = r.L_T;
    if (opts.store_paths) out.V.middleRows(first, cnt) = r.paths;
    out.truncated += r.truncated;
  }
}

void check_sizes(double T, std::size_t n_steps, std::size_t n_paths) {
  if (!(T > 0.0)) throw ArgumentError("simulate: T must be positive");
  if (n_steps == 0) throw ArgumentError("simulate: n_steps must be positive");
  if (n_paths == 0) throw ArgumentError("simulate: n_paths must be positive");
}

PathSet make_pathset(double T, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed, std::string scheme,
                     const ModelParams& m, bool with_price) {
  PathSet p;
  p.grid = UniformGrid(T, n_steps);
  p.n_paths = n_paths;
  p.seed = seed;
  p.scheme = std::move(scheme);
  p.L0 = m.L0;
  p.has_price = with_price;
  return p;
}

/// Shared Euler state for one batch: truncation, storage, trapezoid and the log-price step.
struct EulerBatch {
  const ModelParams& m;
  const SimulationOptions& opts;
  std::uint64_t seed;
  std::size_t first_path;
  double dt;
  bool truncate;
  BatchResult r;
  RealVector L;

  EulerBatch(const ModelParams& model, const SimulationOptions& o, std::uint64_t s, std::size_t first,
             std::size_t count, std::size_t points, double step)
      : m(model), opts(o), seed(s), first_path(first), dt(step), truncate(model.a > 0.0) {
    const auto c = static_cast<Eigen::Index>(count);
    r.integrated = RealVector::Zero(c);
    if (opts.store_paths) r.paths.resize(c, static_cast<Eigen::Index>(points));
    if (opts.with_price) L = RealVector::Constant(c, m.L0);
  }

  /// Records the truncated state at node j and returns the increment
  /// drift(V) + diffusion(max(V, 0)) * dW / dt for each path.
  RealVector step(const RealVector& V, std::size_t j, std::size_t last) {
    const Eigen::Index c = V.size();
    RealVector Vhat = V;
    if (truncate) {
      for (Eigen::Index p = 0; p < c; ++p)
        if (V[p] < 0.0) {
          ++r.truncated;
          Vhat[p] = 0.0;
        }
    }
    if (opts.store_paths) r.paths.col(static_cast<Eigen::Index>(j)) = Vhat;
    const double w = (j == 0 || j == last) ? 0.5 * dt : dt;
    r.integrated += w * Vhat;
    if (j == last) {
      r.V_T = Vhat;
      r.state_T = V;
      r.L_T = L;
      return {};
    }
    const double sq = std::sqrt(dt);
    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - m.rho * m.rho));
    RealVector X(c);
    for (Eigen::Index p = 0; p < c; ++p) {
      const std::uint64_t path = first_path + static_cast<std::uint64_t>(p);
      const double dW = sq * counter_normal(seed, path, j, 0);
      const double diffusion = std::sqrt(std::max(0.0, m.alpha0 + m.a * Vhat[p]));
      X[p] = (m.beta - m.lambda * V[p]) + diffusion * dW / dt;
      if (opts.with_price) {
        const double vp = std::max(V[p], 0.0);
        const double dB = m.rho * dW + rho_perp * sq * counter_normal(seed, path, j, 1);
        L[p] += -0.5 * vp * dt + std::sqrt(vp) * dB;
      }
    }
    return X;
  }
};

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ path);
  h = splitmix64(h ^ (step * 4 + stream));
  const double u1 = to_unit(h);
  const double u2 = to_unit(splitmix64(h ^ 0x5851f42d4c957f2dULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double PathSet::truncation_fraction() const {
  const double total = static_cast<double>(n_paths) * static_cast<double>(grid.steps);
  return total > 0.0 ? static_cast<double>(truncated) / total : 0.0;
}

PathSet simulate_volterra(const KernelSpec& k, const ModelParams& m, double T, std::size_t n_steps,
                          std::size_t n_paths, std::uint64_t seed, const SimulationOptions& opts) {
  m.validate();
  check_sizes(T, n_steps, n_paths);
  PathSet out = make_pathset(T, n_steps, n_paths, seed, "volterra-euler", m, opts.with_price);
  const ProductWeights pw(k, out.grid);
  const double dt = out.grid.dt();
  // reversed[n - 1 - i] = first[i], so tail(j) lines up with increments 0..j-1.
  const RealVector reversed = pw.first.reverse();
  const auto n = static_cast<Eigen::Index>(n_steps);

  auto batch = [&](std::size_t first, std::size_t count) {
    EulerBatch eb(m, opts, seed, first, count, out.grid.points(), dt);
    const auto c = static_cast<Eigen::Index>(count);
    Eigen::MatrixXd X(c, n);
    RealVector V = RealVector::Constant(c, m.V0);
    for (Eigen::Index j = 0; j <= n; ++j) {
      if (j > 0) V = RealVector::Constant(c, m.V0) + X.leftCols(j) * reversed.tail(j);
      RealVector inc = eb.step(V, static_cast<std::size_t>(j), n_steps);
      if (j < n) X.col(j) = inc;
    }
    return std::move(eb.r);
  };
  for_each_batch(n_paths, opts, batch, out);
  return out;
}

PathSet simulate_volterra_ou(const KernelSpec& k, const ModelParams& m, double T, std::size_t n_steps,
                             std::size_t n_paths, std::uint64_t seed, const SimulationOptions& opts) {
  m.validate();
  if (m.a != 0.0) throw ArgumentError("simulate_volterra_ou: requires a = 0");
  if (m.lambda > 0.0 || opts.with_price) return simulate_volterra(k, m, T, n_steps, n_paths, seed, opts);
  check_sizes(T, n_steps, n_paths);
  PathSet out = make_pathset(T, n_steps, n_paths, seed, "ou-exact", m, false);
  const auto n = static_cast<Eigen::Index>(n_steps);
  const double dt = out.grid.dt();

  RealVector mean(n);
  for (Eigen::Index i = 0; i < n; ++i) mean[i] = m.V0 + m.beta * k.cumulative(dt * static_cast<double>(i + 1));

  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(n, n);
  if (m.alpha0 > 0.0) {
    Eigen::MatrixXd cov(n, n);
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = dt * static_cast<double>(i + 1);
      cov(i, i) = m.alpha0 * k.square_mass(s);
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double gap = dt * static_cast<double>(j - i);
        // int_0^s K(x) K(gap + x) dx
        auto f = [&](double x) { return x <= 0.0 ? 0.0 : k(x) * k(gap + x); };
        cov(i, j) = cov(j, i) = m.alpha0 * integrator.integrate(f, 0.0, s);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) {
      factor = llt.matrixL();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
      const RealVector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      factor = eig.eigenvectors() * root.asDiagonal();
    }
  }

  auto batch = [&](std::size_t first, std::size_t count) {
    const auto c = static_cast<Eigen::Index>(count);
    Eigen::MatrixXd Z(n, c);
    for (Eigen::Index p = 0; p < c; ++p)
      for (Eigen::Index j = 0; j < n; ++j)
        Z(j, p) = counter_normal(seed, first + static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(j), 0);
    Eigen::MatrixXd V(c, n + 1);
    V.col(0).setConstant(m.V0);
    V.rightCols(n) = ((factor * Z).colwise() + mean).transpose();
    BatchResult r;
    r.V_T = V.col(n);
    r.state_T = r.V_T;
    r.integrated = dt * (V.rowwise().sum() - 0.5 * (V.col(0) + V.col(n)));
    if (opts.store_paths) r.paths = std::move(V);
    return r;
  };
  for_each_batch(n_paths, opts, batch, out);
  return out;
}

PathSet simulate_lift(const Atoms& atoms, const ModelParams& m, double T, std::size_t n_steps, std::size_t n_paths,
                      std::uint64_t seed, const SimulationOptions& opts) {
  m.validate();
  check_sizes(T, n_steps, n_paths);
  if (atoms.size() == 0) throw ArgumentError("simulate_lift: need at least one atom");
  PathSet out = make_pathset(T, n_steps, n_paths, seed, "lift-euler", m, opts.with_price);
  const double dt = out.grid.dt();
  const auto na = static_cast<Eigen::Index>(atoms.size());
  RealVector decay(na), gain(na);
  for (Eigen::Index i = 0; i < na; ++i) {
    const double z = atoms.rates[i] * dt;
    decay[i] = std::exp(-z);
    gain[i] = z < 1e-8 ? dt * (1.0 - 0.5 * z) : -std::expm1(-z) / atoms.rates[i];
  }

  auto batch = [&](std::size_t first, std::size_t count) {
    EulerBatch eb(m, opts, seed, first, count, out.grid.points(), dt);
    const auto c = static_cast<Eigen::Index>(count);
    // Factors of V - V0.
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(c, na);
    for (std::size_t j = 0; j <= n_steps; ++j) {
      RealVector V = (U * atoms.weights).array() + m.V0;
      RealVector X = eb.step(V, j, n_steps);
      if (j < n_steps) U = (U * decay.asDiagonal()) + X * gain.transpose();
    }
    return std::move(eb.r);
  };
  for_each_batch(n_paths, opts, batch, out);
  return out;
}

double holder_estimate(const PathSet& p, const std::vector<double>& lags) {
  if (lags.size() < 3) throw ArgumentError("holder_estimate: need at least 3 lags");
  if (!p.has_paths()) throw ArgumentError("holder_estimate: path set has no stored paths");
  if (p.n_paths < 1000) throw ArgumentError("holder_estimate: need at least 1000 paths");
  const double dt = p.grid.dt();
  std::vector<double> xs, ys;
  for (double h : lags) {
    const double ratio = h / dt;
    const auto steps = static_cast<Eigen::Index>(std::llround(ratio));
    if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio ||
        steps >= static_cast<Eigen::Index>(p.grid.points()))
      throw ArgumentError("holder_estimate: lags must be positive multiples of the grid step below T");
    const Eigen::Index cols = p.V.cols() - steps;
    const double ms = (p.V.rightCols(cols) - p.V.leftCols(cols)).squaredNorm() /
                      (static_cast<double>(cols) * static_cast<double>(p.V.rows()));
    if (!(ms > 0.0)) throw NumericalError("holder_estimate: zero increments, regression undefined", xs.size(), "holder");
    xs.push_back(std::log(h));
    ys.push_back(std::log(ms));
  }
  const Eigen::Map<const RealVector> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
  const Eigen::Map<const RealVector> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const RealVector xc = x.array() - x.mean();
  const double sxx = xc.squaredNorm();
  if (!(sxx > 0.0)) throw ArgumentError("holder_estimate: lags must be distinct");
  return xc.dot(y.array().matrix() - RealVector::Constant(y.size(), y.mean())) / sxx;
}

MCEstimate mc_transform(const PathSet& p, const ExponentTriple& e) {
  const bool uses_price = e.u != cplx(0.0, 0.0);
  if (uses_price && !p.has_price) throw ArgumentError("mc_transform: u != 0 needs simulated log-prices");
  const auto n = static_cast<Eigen::Index>(p.n_paths);
  ComplexVector samples(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cplx x{0.0, 0.0};
    if (uses_price) x += e.u * p.L_T[i];
    if (e.v != cplx(0.0, 0.0)) x += e.v * p.V_T[i];
    if (e.w != cplx(0.0, 0.0)) x += e.w * p.integrated_V[i];
    samples[i] = std::exp(x);
  }
  MCEstimate out;
  out.value = samples.mean();
  if (n > 1) {
    // Jackknife standard error of a mean.
    const double ss = (samples.array() - out.value).abs2().sum();
    out.standard_error = std::sqrt(ss / (static_cast<double>(n) * static_cast<double>(n - 1)));
  }
  return out;
}

MCEstimate mc_mean_terminal(const PathSet& p) {
  const auto n = static_cast<double>(p.n_paths);
  MCEstimate out;
  const double mean = p.state_T.mean();
  out.value = mean;
  if (p.n_paths > 1)
    out.standard_error = std::sqrt((p.state_T.array() - mean).square().sum() / (n * (n - 1.0)));
  return out;
}

}  // namespace affvol
