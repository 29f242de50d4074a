#include "affvol/model.hpp"

#include <cmath>

#include "affvol/errors.hpp"

namespace affvol {

ModelParams ModelParams::heston(double lambda, double theta, double sigma, double rho, double V0, double L0) {
  ModelParams m;
  m.lambda = lambda;
  m.beta = lambda * theta;
  m.sigma = sigma;
  m.a = sigma * sigma;
  m.rho = rho;
  m.V0 = V0;
  m.L0 = L0;
  return m;
}

std::optional<double> ModelParams::theta() const {
  if (lambda > 0.0) return beta / lambda;
  return std::nullopt;
}

std::vector<std::string> ModelParams::problems() const {
  std::vector<std::string> out;
  if (lambda < 0.0) out.emplace_back("lambda must be nonnegative");
  if (a < 0.0) out.emplace_back("a must be nonnegative");
  if (alpha0 < 0.0) out.emplace_back("alpha0 must be nonnegative");
  if (alpha0 != 0.0 && a != 0.0) out.emplace_back("one of alpha0, a must vanish (square-root or OU class)");
  if (sigma < 0.0) out.emplace_back("sigma must be nonnegative");
  if (rho < -1.0 || rho > 1.0) out.emplace_back("rho must lie in [-1, 1]");
  if (a > 0.0) {
    if (beta < 0.0) out.emplace_back("square-root class requires beta >= 0");
    if (V0 < 0.0) out.emplace_back("square-root class requires V0 >= 0");
  }
  if ((a > 0.0 || sigma > 0.0) && std::abs(sigma * sigma - a) > 1e-12 * std::max(1.0, a))
    out.emplace_back("sigma^2 must equal a");
  if (!std::isfinite(beta + lambda + alpha0 + a + sigma + rho + V0 + L0)) out.emplace_back("parameters must be finite");
  return out;
}

void ModelParams::validate() const {
  const auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& s : p) msg += " " + s + ";";
  throw ArgumentError(msg);
}

}  // namespace affvol
