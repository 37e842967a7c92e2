#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divcurl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operator applied outside the degree range it is defined on.
class DegreeError : public Error {
 public:
  using Error::Error;
};

/// Operands live on different grids, degrees, complexes or have incompatible shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition on an input value (non-finite data, bad tolerance, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Iterative solver stopped before reaching its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, int iterations, double residual)
      : Error(what + " (iterations=" + std::to_string(iterations) +
              ", relative residual=" + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Sampled geometry is unusable at some node (rank loss, frame jump, degenerate metric).
class GeometryError : public Error {
 public:
  GeometryError(const std::string& what, std::size_t node)
      : Error(what + " at node " + std::to_string(node)), node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Malformed file or container.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace divcurl
