#pragma once

#include <stdexcept>
#include <string>

namespace conespec {

enum class ErrorKind {
  domain,            // point outside the model domain
  singular_point,    // mixture density vanishes where a ratio is needed
  invalid_argument,  // precondition on a numeric argument violated
  disconnected,      // active set or graph not connected where required
  isolated_vertex,   // degree zero in a proximity graph
  non_convergence,   // iterative method stopped before tolerance
  sampler,           // rejection sampler too inefficient
  rank_deficient,    // vectors not linearly independent
  dimension,         // shape mismatch
  io,                // file or parse failure
};

const char* to_string(ErrorKind kind);

/// Base exception for the library. Every error carries a kind so callers
/// (the CLI in particular) can map failures to exit codes and messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Thrown by iterative solvers; carries the best residual reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(ErrorKind::non_convergence, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace conespec
