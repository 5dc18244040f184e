#ifndef ANNEALED_ISING_ERRORS_HPP
#define ANNEALED_ISING_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ising {

/// Invalid input: out-of-range parameters, malformed files, bad indices.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure did not reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double tolerance)
      : std::runtime_error(what), tolerance_(tolerance) {}

  double tolerance() const noexcept { return tolerance_; }

 private:
  double tolerance_;
};

/// Raised when a quantity diverges exactly at the critical point
/// (B = 0 and theta * nu = 1), e.g. dz*/dB or the susceptibility.
class CriticalDivergence : public NumericalError {
 public:
  explicit CriticalDivergence(const std::string& what) : NumericalError(what, 0.0) {}
};

}  // namespace ising

#endif  // ANNEALED_ISING_ERRORS_HPP
