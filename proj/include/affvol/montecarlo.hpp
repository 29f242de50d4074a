#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "affvol/kernel.hpp"
#include "affvol/model.hpp"

namespace affvol {

/// Standard normal draw indexed by (seed, path, step, stream). Pure function
/// of its arguments, so any evaluation order gives the same numbers.
double counter_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step, std::uint64_t stream);

struct SimulationOptions {
  bool with_price = false;
  /// Keep every V path (n_paths x (n_steps + 1)); required by holder_estimate.
  bool store_paths = false;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  std::size_t batch = 256;
};

struct PathSet {
  UniformGrid grid;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  /// volterra-euler | ou-exact | lift-euler
  std::string scheme;
  double L0 = 0.0;
  /// Terminal variance after truncation (>= 0 for the square-root class).
  RealVector V_T;
  /// Terminal Volterra state before truncation. Its expectation is the
  /// discrete forward curve, since the drift acts on the untruncated state.
  RealVector state_T;
  RealVector L_T;
  /// Trapezoid approximation of int_0^T V per path.
  RealVector integrated_V;
  /// Full V paths, row per path. Empty unless requested.
  Eigen::MatrixXd V;
  bool has_price = false;
  /// Number of steps at which the pre-truncation V was negative.
  std::size_t truncated = 0;

  bool has_paths() const { return V.size() > 0; }
  double truncation_fraction() const;
};

PathSet simulate_volterra(const KernelSpec& k, const ModelParams& m, double T, std::size_t n_steps,
                          std::size_t n_paths, std::uint64_t seed, const SimulationOptions& opts = {});

PathSet simulate_volterra_ou(const KernelSpec& k, const ModelParams& m, double T, std::size_t n_steps,
                             std::size_t n_paths, std::uint64_t seed, const SimulationOptions& opts = {});

/// Lift SDE for V - V0 with the shifted coefficients of lift_shifted_model.
PathSet simulate_lift(const Atoms& atoms, const ModelParams& m, double T, std::size_t n_steps, std::size_t n_paths,
                      std::uint64_t seed, const SimulationOptions& opts = {});

/// Slope of log E|V(t+h) - V(t)|^2 against log h. Lags are times and must be
/// multiples of the grid step.
double holder_estimate(const PathSet& p, const std::vector<double>& lags);

struct MCEstimate {
  cplx value{0.0, 0.0};
  double standard_error = 0.0;
};

/// Sample mean of exp(u L_T + v V_T + w int V) and its standard error.
MCEstimate mc_transform(const PathSet& p, const ExponentTriple& e);

/// Sample mean and standard error of the pre-truncation terminal state.
MCEstimate mc_mean_terminal(const PathSet& p);

}  // namespace affvol
