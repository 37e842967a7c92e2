#pragma once

#include <optional>

#include "divcurl/grid.hpp"
#include "divcurl/solvers.hpp"

namespace divcurl {

struct HodgeDecomposition {
  std::optional<Cochain> alpha;  // degree q-1, absent for q = 0
  std::optional<Cochain> beta;   // degree q+1, absent for q = dim
  Cochain exact;                 // d(alpha)
  Cochain coexact;               // δ(beta)
  Cochain harmonic;              // c - exact - coexact

  double laplacian_residual = 0.0;   // ||Δh|| / ||c||
  double reassembly_residual = 0.0;  // ||c - dα - δβ - h|| / ||c||
  double orthogonality = 0.0;        // max pairwise |<x, y>| / ||c||^2
  int iterations = 0;                // both solves together
};

/// c = dα + δβ + h. α solves Δα = δc and β solves Δβ = dc by deflated conjugate
/// gradients against the parallel forms; the inner solve tolerance is tightened by
/// the Laplacian's spectral radius so that ||Δh|| <= tol ||c||.
HodgeDecomposition hodge_decompose(const Cochain& c, double tol = 1e-8, int max_iterations = 20000);

}  // namespace divcurl
