#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace affvol {

/// Argument outside the mathematical domain of a function (e.g. Gamma at x <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid call parameters (grid sizes, parameter classes, unsupported variants).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver failed: non-finite values, non-convergent corrector, blow-up.
/// `index` is the first offending grid step, or npos when not step-related.
class NumericalError : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  NumericalError(std::string what, std::size_t index = npos, std::string solver = {})
      : std::runtime_error(std::move(what)), index_(index), solver_(std::move(solver)) {}

  std::size_t index() const noexcept { return index_; }
  const std::string& solver() const noexcept { return solver_; }

 private:
  std::size_t index_;
  std::string solver_;
};

/// Collected configuration problems; all violations are reported together.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out;
    for (const auto& s : p) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

}  // namespace affvol
