#pragma once

// Integrated discrete exterior calculus on flat periodic grids (2-tori and 3-tori).
//
// A q-cell is identified by an axis set S (|S| = q, the axes the cell spans) and the
// multi-index m of its lowest corner. Cochain values are integrals of the smooth form
// over the oriented cell, so d is an exact signed sum and d∘d vanishes identically.
//
// Dual cells are addressed through their primal partner: the dual of primal cell
// (S, m) has axis set S^c and is stored at the same m.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace divcurl {

/// Bit a set means the cell spans axis a.
using AxisMask = unsigned;

using NodeIndex = std::array<int, 3>;
using Point = std::array<double, 3>;

int popcount(AxisMask mask);

/// Sign of the permutation that sorts the concatenation (first, second); both masks
/// are read in increasing axis order and must be disjoint.
int shuffle_sign(AxisMask first, AxisMask second);

class PeriodicGrid {
 public:
  PeriodicGrid(std::vector<int> resolution, std::vector<double> period);

  /// dim-torus with n cells and length `length` on every axis.
  static PeriodicGrid cube(int dim, int n, double length = 1.0);

  int dim() const noexcept { return dim_; }
  int resolution(int axis) const { return resolution_[axis]; }
  double period(int axis) const { return period_[axis]; }
  double spacing(int axis) const { return period_[axis] / resolution_[axis]; }
  double volume() const;

  std::size_t node_count() const noexcept { return nodes_; }
  /// binomial(dim, degree) * node_count()
  std::size_t cell_count(int degree) const;

  /// Axis sets of the given degree in lexicographic order.
  const std::vector<AxisMask>& axis_sets(int degree) const;
  int axis_set_position(AxisMask mask) const;
  AxisMask full_mask() const noexcept { return (1u << dim_) - 1u; }

  /// Product of spacings over the axes in `mask`.
  double extent(AxisMask mask) const;
  /// Ratio dual volume / primal volume for primal cells with axis set `mask`.
  double hodge_ratio(AxisMask mask) const { return extent(full_mask() & ~mask) / extent(mask); }

  NodeIndex multi_index(std::size_t node) const;
  /// Wraps every component periodically.
  std::size_t node_index(const NodeIndex& m) const;
  std::size_t shifted(std::size_t node, int axis, int offset) const;
  Point node_position(std::size_t node) const;

  bool operator==(const PeriodicGrid& other) const;

 private:
  int dim_;
  std::vector<int> resolution_;
  std::vector<double> period_;
  std::size_t nodes_ = 1;
  std::array<std::size_t, 3> stride_{};
  std::array<std::vector<AxisMask>, 4> sets_;
};

enum class Complex { primal, dual };

/// Real values on the oriented q-cells of a grid (or of its dual), laid out as
/// [axis-set position][node index].
class Cochain {
 public:
  Cochain(PeriodicGrid grid, int degree, Eigen::VectorXd values, Complex complex = Complex::primal);

  static Cochain zero(const PeriodicGrid& grid, int degree, Complex complex = Complex::primal);

  const PeriodicGrid& grid() const noexcept { return grid_; }
  int degree() const noexcept { return degree_; }
  Complex complex() const noexcept { return complex_; }
  bool is_dual() const noexcept { return complex_ == Complex::dual; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

  double value(int set_position, std::size_t node) const {
    return values_[static_cast<Eigen::Index>(set_position * grid_.node_count() + node)];
  }

  /// Cochain with the same grid, degree and complex but new values.
  Cochain with_values(Eigen::VectorXd values) const;

  friend Cochain operator+(const Cochain& a, const Cochain& b);
  friend Cochain operator-(const Cochain& a, const Cochain& b);
  friend Cochain operator*(double s, const Cochain& a);

 private:
  PeriodicGrid grid_;
  int degree_;
  Complex complex_;
  Eigen::VectorXd values_;
};

/// Hodge weights of the discrete inner product: one positive weight per cell.
Eigen::VectorXd hodge_weights(const PeriodicGrid& grid, int degree, Complex complex = Complex::primal);

Cochain exterior_derivative(const Cochain& c);
Cochain hodge_star(const Cochain& c);
/// δ = (-1)^{dim(q-1)+1} ★d★, the adjoint of d in the discrete inner product.
Cochain codifferential(const Cochain& c);
/// Δ = dδ + δd; terms undefined at the end degrees are dropped.
Cochain laplace_beltrami(const Cochain& c);

double l2_inner(const Cochain& a, const Cochain& b);
double l2_norm(const Cochain& c);

/// Point coefficients of a primal cochain reconstructed at the primal nodes, one row per
/// axis set. Cell integrals are deconvolved to point values with the sixth-order
/// centred stencil (1, -8, 37, 37, -8, 1)/60 along every axis the cells span.
Eigen::MatrixXd reconstruct_at_nodes(const Cochain& c);

/// Pointwise flat-metric inner product <a, b>(x_m) at every node.
Eigen::VectorXd node_inner_product(const Cochain& a, const Cochain& b);

/// Sum over nodes of <a, b>(x_m) psi(x_m) times the cell volume.
double pair_with_test(const Cochain& a, const Cochain& b, const Cochain& psi);

// --- construction helpers ---------------------------------------------------------

/// 0-cochain of point values f(x_m).
Cochain sample_nodes(const PeriodicGrid& grid, const std::function<double(const Point&)>& f);

/// Coefficient of the form on the basis element dx_S at a point.
using FormCoefficient = std::function<double(AxisMask, const Point&)>;

/// Cell integrals of the form sum_S f_S dx_S with tensor Gauss-Legendre quadrature
/// (`points` per spanned axis, 1 <= points <= 4).
Cochain integrate_form(const PeriodicGrid& grid, int degree, const FormCoefficient& f, int points = 4);

/// Unit parallel form dx_S (cell integral = cell extent on S-cells, zero elsewhere).
Cochain parallel_form(const PeriodicGrid& grid, AxisMask mask);

}  // namespace divcurl
