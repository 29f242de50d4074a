#pragma once

#include <cstddef>
#include <cstdint>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "affvol/kernel.hpp"
#include "affvol/model.hpp"
#include "affvol/riccati.hpp"
#include "affvol/transforms.hpp"

namespace affvol {

struct KernelConfig {
  /// constant | power_law | exp_sum
  std::string type = "constant";
  double alpha = 1.0;
  double scale = 1.0;
  /// exp_sum atoms as (weight, rate) pairs.
  std::vector<std::array<double, 2>> atoms;
};

/// Model block as given; unset entries are derived by resolve().
struct ModelConfig {
  double lambda = 0.0;
  std::optional<double> beta;
  std::optional<double> theta;
  double alpha0 = 0.0;
  std::optional<double> a;
  std::optional<double> sigma;
  double rho = 0.0;
  double V0 = 0.0;
  double S0 = 1.0;
};

struct NumericsConfig {
  std::size_t n = 500;
  double tolerance = 1e-12;
  std::size_t max_iterations = 50;
  std::size_t atoms = 200;
  std::vector<std::size_t> atom_counts{10, 50, 200};
  double x_max = 1e6;
  double first_edge = 0.01;
  double truncation = 200.0;
  double step = 0.25;
  double tail_tolerance = 1e-7;
  unsigned threads = 0;
};

struct CommandConfig {
  double T = 1.0;
  cplx u{0.0, 0.0};
  cplx v{0.0, 0.0};
  cplx w{0.0, 0.0};
  std::vector<double> strikes{1.0};
  /// call | put
  std::string kind = "call";
  /// resolvent: numeric | analytic. riccati and cf: volterra | fractional | convolution | lift.
  std::string solver;
  /// volterra | ou | lift
  std::string scheme = "volterra";
  std::size_t paths = 10000;
  std::size_t steps = 500;
  std::uint64_t seed = 42;
  bool dump_paths = false;
};

struct RunConfig {
  KernelConfig kernel;
  ModelConfig model;
  NumericsConfig numerics;
  CommandConfig cmd;

  KernelSpec kernel_spec() const;
  ModelParams model_params() const;
  /// Atoms of the kernel's Laplace measure, `n` cells for densities.
  Atoms atoms(std::size_t n) const;
  RiccatiOptions riccati_options() const;
  InversionGrid inversion_grid() const;
};

/// Parses `key = value` lines (# comments allowed) or a JSON object of the
/// same keys, optionally nested under "config" as in emitted reports.
/// Overrides replace entries of the document before validation.
/// Throws ConfigError listing every problem found.
RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides = {});

/// Flat JSON object of the resolved configuration; parse_config reads it back.
nlohmann::json config_to_json(const RunConfig& cfg);

/// "re,im" form used for complex values in configs and reports.
std::string format_complex(cplx z);
cplx parse_complex(const std::string& s);

}  // namespace affvol
