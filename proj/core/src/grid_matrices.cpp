#include "divcurl/grid_matrices.hpp"

#include <vector>

#include "divcurl/error.hpp"

namespace divcurl {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols, const std::vector<Triplet>& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SparseMatrix exterior_derivative_matrix(const PeriodicGrid& grid, int degree) {
  if (degree < 0 || degree >= grid.dim()) throw DegreeError("no exterior derivative out of this degree");
  const std::size_t nn = grid.node_count();
  const auto& out_sets = grid.axis_sets(degree + 1);
  std::vector<Triplet> t;
  t.reserve(out_sets.size() * nn * 2 * static_cast<std::size_t>(degree + 1));
  for (std::size_t s = 0; s < out_sets.size(); ++s) {
    int j = 0;
    for (int b = 0; b < grid.dim(); ++b) {
      if (!(out_sets[s] & (1u << b))) continue;
      const double sign = (j++ % 2 == 0) ? 1.0 : -1.0;
      const auto face = static_cast<std::size_t>(grid.axis_set_position(out_sets[s] & ~(1u << b)));
      for (std::size_t m = 0; m < nn; ++m) {
        const auto row = static_cast<Eigen::Index>(s * nn + m);
        t.emplace_back(row, static_cast<Eigen::Index>(face * nn + grid.shifted(m, b, 1)), sign);
        t.emplace_back(row, static_cast<Eigen::Index>(face * nn + m), -sign);
      }
    }
  }
  return from_triplets(static_cast<Eigen::Index>(grid.cell_count(degree + 1)),
                       static_cast<Eigen::Index>(grid.cell_count(degree)), t);
}

SparseMatrix codifferential_matrix(const PeriodicGrid& grid, int degree) {
  if (degree < 1 || degree > grid.dim()) throw DegreeError("no codifferential out of this degree");
  const SparseMatrix d = exterior_derivative_matrix(grid, degree - 1);
  const Eigen::VectorXd m_lo = hodge_weights(grid, degree - 1);
  const Eigen::VectorXd m_hi = hodge_weights(grid, degree);
  SparseMatrix dt = d.transpose();
  for (Eigen::Index r = 0; r < dt.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(dt, r); it; ++it) it.valueRef() *= m_hi[it.col()] / m_lo[r];
  return dt;
}

SparseMatrix laplacian_matrix(const PeriodicGrid& grid, int degree) {
  const auto n = static_cast<Eigen::Index>(grid.cell_count(degree));
  SparseMatrix lap(n, n);
  if (degree > 0) lap = SparseMatrix(exterior_derivative_matrix(grid, degree - 1) * codifferential_matrix(grid, degree));
  if (degree < grid.dim())
    lap = SparseMatrix(lap + SparseMatrix(codifferential_matrix(grid, degree + 1) * exterior_derivative_matrix(grid, degree)));
  lap.prune(0.0);
  lap.makeCompressed();
  return lap;
}

SparseMatrix assemble_by_probing(const PeriodicGrid& grid, int degree,
                                 const std::function<Cochain(const Cochain&)>& op) {
  const auto cols = static_cast<Eigen::Index>(grid.cell_count(degree));
  std::vector<Triplet> t;
  Eigen::Index rows = -1;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    e[j] = 1.0;
    const Cochain out = op(Cochain(grid, degree, e));
    e[j] = 0.0;
    rows = static_cast<Eigen::Index>(out.size());
    for (Eigen::Index i = 0; i < rows; ++i)
      if (out.values()[i] != 0.0) t.emplace_back(i, j, out.values()[i]);
  }
  return from_triplets(rows, cols, t);
}

Eigen::MatrixXd harmonic_basis(const PeriodicGrid& grid, int degree) {
  const auto& sets = grid.axis_sets(degree);
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(grid.cell_count(degree)), static_cast<Eigen::Index>(sets.size()));
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const Cochain p = parallel_form(grid, sets[s]);
    basis.col(static_cast<Eigen::Index>(s)) = p.values() / l2_norm(p);
  }
  return basis;
}

}  // namespace divcurl
