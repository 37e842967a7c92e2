#include "divcurl/hodge.hpp"

#include <algorithm>
#include <cmath>

#include "divcurl/error.hpp"
#include "divcurl/grid_matrices.hpp"

namespace divcurl {

namespace {

double gershgorin_bound(const SparseMatrix& a) {
  double bound = 0.0;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) row += std::abs(it.value());
    bound = std::max(bound, row);
  }
  return bound;
}

struct Potential {
  Cochain value;
  int iterations;
};

// Solves Δ_p x = rhs on p-cochains.
Potential solve_laplacian(const Cochain& rhs, double tol, int max_iterations) {
  const PeriodicGrid& g = rhs.grid();
  const int p = rhs.degree();
  const SparseMatrix lap = laplacian_matrix(g, p);
  CgOptions opt;
  opt.tol = std::max(tol / gershgorin_bound(lap), 1e-15);
  opt.max_iterations = max_iterations;
  const Eigen::VectorXd w = hodge_weights(g, p);
  const CgResult r = deflated_cg([&](const Eigen::VectorXd& x) { return Eigen::VectorXd(lap * x); }, rhs.values(), w,
                                 harmonic_basis(g, p), opt);
  return {rhs.with_values(r.x), r.iterations};
}

}  // namespace

HodgeDecomposition hodge_decompose(const Cochain& c, double tol, int max_iterations) {
  if (!(tol > 0.0)) throw InvalidArgument("hodge_decompose: tolerance must be positive");
  if (c.is_dual()) throw ShapeError("hodge_decompose expects a primal cochain");
  const PeriodicGrid& g = c.grid();
  const int q = c.degree();

  Cochain exact = Cochain::zero(g, q);
  Cochain coexact = Cochain::zero(g, q);
  std::optional<Cochain> alpha;
  std::optional<Cochain> beta;
  int iterations = 0;

  if (q > 0) {
    Potential a = solve_laplacian(codifferential(c), tol, max_iterations);
    iterations += a.iterations;
    exact = exterior_derivative(a.value);
    alpha = std::move(a.value);
  }
  if (q < g.dim()) {
    Potential b = solve_laplacian(exterior_derivative(c), tol, max_iterations);
    iterations += b.iterations;
    coexact = codifferential(b.value);
    beta = std::move(b.value);
  }
  Cochain harmonic = c - exact - coexact;

  HodgeDecomposition out{alpha, beta, exact, coexact, harmonic};
  out.iterations = iterations;
  const double cn = l2_norm(c);
  if (cn > 0.0) {
    out.laplacian_residual = l2_norm(laplace_beltrami(harmonic)) / cn;
    out.reassembly_residual = l2_norm(c - exact - coexact - harmonic) / cn;
    const double c2 = cn * cn;
    out.orthogonality = std::max({std::abs(l2_inner(exact, coexact)), std::abs(l2_inner(exact, harmonic)),
                                  std::abs(l2_inner(coexact, harmonic))}) /
                        c2;
  }
  return out;
}

}  // namespace divcurl
