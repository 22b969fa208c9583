#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace parabolic {

/// Input outside the domain of an operation (bad dimension, non-positive
/// scale, time outside the window, non-unit direction, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A certified inequality failed on a sample. Always indicates a bug in the
/// library rather than bad input.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// f(a, .) does not change sign over the implicit interval.
class NondegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The implicit-function neighborhood shrank below the minimum radius.
class NeighborhoodError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A boundary chart failed its graph/boundary verification.
class ChartInvalidError : public std::runtime_error {
 public:
  ChartInvalidError(const std::string& what, double residual, double s,
                    std::vector<double> x)
      : std::runtime_error(what),
        worst_residual(residual),
        worst_s(s),
        worst_x(std::move(x)) {}

  double worst_residual;
  double worst_s;
  std::vector<double> worst_x;
};

/// Atlas construction failed at a particular boundary seed.
class AtlasBuildError : public std::runtime_error {
 public:
  AtlasBuildError(const std::string& what, double s, std::vector<double> omega)
      : std::runtime_error(what), seed_s(s), seed_omega(std::move(omega)) {}

  double seed_s;
  std::vector<double> seed_omega;
};

/// Malformed or inconsistent domain configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace parabolic
