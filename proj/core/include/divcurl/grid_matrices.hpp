#pragma once

// Sparse matrix forms of the grid operators, acting on primal cochain value vectors.

#include <functional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "divcurl/grid.hpp"

namespace divcurl {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// d on primal q-cochains, built directly from the cell incidence (entries ±1).
SparseMatrix exterior_derivative_matrix(const PeriodicGrid& grid, int degree);

/// M_{q-1}^{-1} d_{q-1}^T M_q with M the Hodge weights: the inner-product transpose of d.
SparseMatrix codifferential_matrix(const PeriodicGrid& grid, int degree);

/// d_{q-1} δ_q + δ_{q+1} d_q from the two matrices above.
SparseMatrix laplacian_matrix(const PeriodicGrid& grid, int degree);

/// Column-by-column matrix of a linear cochain map, from unit probes. Slow; for tests.
SparseMatrix assemble_by_probing(const PeriodicGrid& grid, int degree,
                                 const std::function<Cochain(const Cochain&)>& op);

/// Parallel q-forms dx_S, one column per axis set, orthonormal in the Hodge inner product.
/// On a flat torus these span the harmonic q-cochains.
Eigen::MatrixXd harmonic_basis(const PeriodicGrid& grid, int degree);

}  // namespace divcurl
