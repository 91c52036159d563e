#pragma once

#include <stdexcept>
#include <string>

namespace afem {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad ids, non-nested meshes, unparsable files.
class InputError : public Error {
public:
  using Error::Error;
};

/// A well-formed input that describes an unusable setup (e.g. no Dirichlet boundary).
class ConfigurationError : public Error {
public:
  using Error::Error;
};

class AssemblyError : public Error {
public:
  using Error::Error;
};

/// Linear or nonlinear solver failure. Carries the last residual seen.
class SolverError : public Error {
public:
  SolverError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

  [[nodiscard]] double residual() const noexcept { return residual_; }

private:
  double residual_;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

} // namespace afem
