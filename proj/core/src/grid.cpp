#include "divcurl/grid.hpp"

#include <bit>
#include <cmath>

#include "divcurl/error.hpp"

namespace divcurl {

int popcount(AxisMask mask) { return std::popcount(mask); }

int shuffle_sign(AxisMask first, AxisMask second) {
  int inversions = 0;
  for (int a = 0; a < 32; ++a) {
    if (!(first & (1u << a))) continue;
    // count axes of `second` smaller than a
    inversions += std::popcount(second & ((1u << a) - 1u));
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

PeriodicGrid::PeriodicGrid(std::vector<int> resolution, std::vector<double> period)
    : dim_(static_cast<int>(resolution.size())),
      resolution_(std::move(resolution)),
      period_(std::move(period)) {
  if (dim_ != 2 && dim_ != 3) throw InvalidArgument("grid dimension must be 2 or 3");
  if (static_cast<int>(period_.size()) != dim_) throw ShapeError("period/resolution length mismatch");
  for (int a = 0; a < dim_; ++a) {
    if (resolution_[a] < 4) throw InvalidArgument("grid resolution must be >= 4 on every axis");
    if (!(period_[a] > 0.0) || !std::isfinite(period_[a]))
      throw InvalidArgument("grid period must be positive and finite");
  }
  stride_.fill(0);
  std::size_t s = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    stride_[a] = s;
    s *= static_cast<std::size_t>(resolution_[a]);
  }
  nodes_ = s;

  // Lexicographic order of sorted axis tuples equals increasing order of the
  // bit-reversed mask; enumerate combinations recursively instead.
  for (int q = 0; q <= dim_; ++q) {
    std::vector<AxisMask>& out = sets_[q];
    std::function<void(int, int, AxisMask)> rec = [&](int start, int left, AxisMask m) {
      if (left == 0) {
        out.push_back(m);
        return;
      }
      for (int a = start; a < dim_; ++a) rec(a + 1, left - 1, m | (1u << a));
    };
    rec(0, q, 0u);
  }
}

PeriodicGrid PeriodicGrid::cube(int dim, int n, double length) {
  return PeriodicGrid(std::vector<int>(static_cast<std::size_t>(dim), n),
                      std::vector<double>(static_cast<std::size_t>(dim), length));
}

double PeriodicGrid::volume() const {
  double v = 1.0;
  for (double p : period_) v *= p;
  return v;
}

std::size_t PeriodicGrid::cell_count(int degree) const {
  if (degree < 0 || degree > dim_) throw DegreeError("degree out of range");
  return sets_[degree].size() * nodes_;
}

const std::vector<AxisMask>& PeriodicGrid::axis_sets(int degree) const {
  if (degree < 0 || degree > dim_) throw DegreeError("degree out of range");
  return sets_[degree];
}

int PeriodicGrid::axis_set_position(AxisMask mask) const {
  const auto& sets = sets_[std::popcount(mask)];
  for (std::size_t i = 0; i < sets.size(); ++i)
    if (sets[i] == mask) return static_cast<int>(i);
  throw InvalidArgument("axis set not on this grid");
}

double PeriodicGrid::extent(AxisMask mask) const {
  double e = 1.0;
  for (int a = 0; a < dim_; ++a)
    if (mask & (1u << a)) e *= spacing(a);
  return e;
}

NodeIndex PeriodicGrid::multi_index(std::size_t node) const {
  NodeIndex m{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    m[a] = static_cast<int>((node / stride_[a]) % static_cast<std::size_t>(resolution_[a]));
  }
  return m;
}

std::size_t PeriodicGrid::node_index(const NodeIndex& m) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    int n = resolution_[a];
    int r = ((m[a] % n) + n) % n;
    idx += static_cast<std::size_t>(r) * stride_[a];
  }
  return idx;
}

std::size_t PeriodicGrid::shifted(std::size_t node, int axis, int offset) const {
  const int n = resolution_[axis];
  const int cur = static_cast<int>((node / stride_[axis]) % static_cast<std::size_t>(n));
  const int nxt = (((cur + offset) % n) + n) % n;
  return node + (static_cast<std::size_t>(nxt) - static_cast<std::size_t>(cur)) * stride_[axis];
}

Point PeriodicGrid::node_position(std::size_t node) const {
  NodeIndex m = multi_index(node);
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = m[a] * spacing(a);
  return x;
}

bool PeriodicGrid::operator==(const PeriodicGrid& other) const {
  return resolution_ == other.resolution_ && period_ == other.period_;
}

// --- Cochain -----------------------------------------------------------------------

Cochain::Cochain(PeriodicGrid grid, int degree, Eigen::VectorXd values, Complex complex)
    : grid_(std::move(grid)), degree_(degree), complex_(complex), values_(std::move(values)) {
  if (degree_ < 0 || degree_ > grid_.dim()) throw DegreeError("cochain degree out of range");
  if (static_cast<std::size_t>(values_.size()) != grid_.cell_count(degree_))
    throw ShapeError("cochain value count does not match the grid's cell count");
  if (!values_.allFinite()) throw InvalidArgument("cochain values must be finite");
}

Cochain Cochain::zero(const PeriodicGrid& grid, int degree, Complex complex) {
  return Cochain(grid, degree, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.cell_count(degree))),
                 complex);
}

Cochain Cochain::with_values(Eigen::VectorXd values) const {
  return Cochain(grid_, degree_, std::move(values), complex_);
}

namespace {

void require_compatible(const Cochain& a, const Cochain& b) {
  if (!(a.grid() == b.grid())) throw ShapeError("cochains live on different grids");
  if (a.degree() != b.degree()) throw ShapeError("cochain degree mismatch");
  if (a.complex() != b.complex()) throw ShapeError("primal/dual complex mismatch");
}

}  // namespace

Cochain operator+(const Cochain& a, const Cochain& b) {
  require_compatible(a, b);
  return a.with_values(a.values_ + b.values_);
}

Cochain operator-(const Cochain& a, const Cochain& b) {
  require_compatible(a, b);
  return a.with_values(a.values_ - b.values_);
}

Cochain operator*(double s, const Cochain& a) { return a.with_values(s * a.values_); }

// --- operators -----------------------------------------------------------------------

Eigen::VectorXd hodge_weights(const PeriodicGrid& grid, int degree, Complex complex) {
  const auto& sets = grid.axis_sets(degree);
  const std::size_t nn = grid.node_count();
  Eigen::VectorXd w(static_cast<Eigen::Index>(sets.size() * nn));
  for (std::size_t s = 0; s < sets.size(); ++s) {
    // A dual T-cell pairs with the primal T^c-cell, so the ratio has the same form.
    (void)complex;
    const double ratio = grid.hodge_ratio(sets[s]);
    w.segment(static_cast<Eigen::Index>(s * nn), static_cast<Eigen::Index>(nn)).setConstant(ratio);
  }
  return w;
}

Cochain exterior_derivative(const Cochain& c) {
  const PeriodicGrid& g = c.grid();
  const int q = c.degree();
  if (q >= g.dim()) throw DegreeError("exterior derivative of a top-degree cochain");
  const std::size_t nn = g.node_count();
  const auto& out_sets = g.axis_sets(q + 1);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out_sets.size() * nn));
  const bool dual = c.is_dual();

  for (std::size_t s = 0; s < out_sets.size(); ++s) {
    const AxisMask target = out_sets[s];
    int j = 0;
    for (int b = 0; b < g.dim(); ++b) {
      if (!(target & (1u << b))) continue;
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      ++j;
      const int face = g.axis_set_position(target & ~(1u << b));
      const std::size_t base_out = s * nn;
      for (std::size_t m = 0; m < nn; ++m) {
        // primal: forward difference across the cell; dual: backward difference
        const std::size_t hi = dual ? m : g.shifted(m, b, +1);
        const std::size_t lo = dual ? g.shifted(m, b, -1) : m;
        out[static_cast<Eigen::Index>(base_out + m)] += sign * (c.value(face, hi) - c.value(face, lo));
      }
    }
  }
  return Cochain(g, q + 1, std::move(out), c.complex());
}

Cochain hodge_star(const Cochain& c) {
  const PeriodicGrid& g = c.grid();
  const int q = c.degree();
  const int p = g.dim() - q;
  const std::size_t nn = g.node_count();
  const AxisMask full = g.full_mask();
  const auto& in_sets = g.axis_sets(q);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.cell_count(p)));
  for (std::size_t s = 0; s < in_sets.size(); ++s) {
    const AxisMask from = in_sets[s];
    const AxisMask to = full & ~from;
    // target cell volume over source cell volume, in either direction
    const double factor = shuffle_sign(from, to) * g.extent(to) / g.extent(from);
    const std::size_t dst = static_cast<std::size_t>(g.axis_set_position(to)) * nn;
    out.segment(static_cast<Eigen::Index>(dst), static_cast<Eigen::Index>(nn)) =
        factor * c.values().segment(static_cast<Eigen::Index>(s * nn), static_cast<Eigen::Index>(nn));
  }
  return Cochain(g, p, std::move(out), c.is_dual() ? Complex::primal : Complex::dual);
}

Cochain codifferential(const Cochain& c) {
  const int q = c.degree();
  if (q == 0) throw DegreeError("codifferential of a 0-cochain");
  const int n = c.grid().dim();
  const int exponent = n * (q - 1) + 1;
  const double sign = (exponent % 2 == 0) ? 1.0 : -1.0;
  return sign * hodge_star(exterior_derivative(hodge_star(c)));
}

Cochain laplace_beltrami(const Cochain& c) {
  const int q = c.degree();
  const int n = c.grid().dim();
  Cochain out = Cochain::zero(c.grid(), q, c.complex());
  if (q > 0) out = out + exterior_derivative(codifferential(c));
  if (q < n) out = out + codifferential(exterior_derivative(c));
  return out;
}

double l2_inner(const Cochain& a, const Cochain& b) {
  require_compatible(a, b);
  const Eigen::VectorXd w = hodge_weights(a.grid(), a.degree(), a.complex());
  return (a.values().array() * b.values().array() * w.array()).sum();
}

double l2_norm(const Cochain& c) { return std::sqrt(l2_inner(c, c)); }

namespace {

// Cell averages along `axis` (cell m spans [m, m+1]) to point values at node m.
void deconvolve_axis(const PeriodicGrid& g, int axis, const double* in, double* out) {
  static constexpr std::array<double, 6> w{1.0, -8.0, 37.0, 37.0, -8.0, 1.0};
  static constexpr std::array<int, 6> off{-3, -2, -1, 0, 1, 2};
  const std::size_t nn = g.node_count();
  for (std::size_t m = 0; m < nn; ++m) {
    double acc = 0.0;
    for (int k = 0; k < 6; ++k) acc += w[k] * in[g.shifted(m, axis, off[k])];
    out[m] = acc / 60.0;
  }
}

}  // namespace

Eigen::MatrixXd reconstruct_at_nodes(const Cochain& c) {
  if (c.is_dual()) throw ShapeError("node reconstruction is defined for primal cochains");
  const PeriodicGrid& g = c.grid();
  const auto& sets = g.axis_sets(c.degree());
  const std::size_t nn = g.node_count();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(sets.size()), static_cast<Eigen::Index>(nn));
  std::vector<double> a(nn), b(nn);
  for (std::size_t s = 0; s < sets.size(); ++s) {
    for (std::size_t m = 0; m < nn; ++m) a[m] = c.value(static_cast<int>(s), m);
    for (int axis = 0; axis < g.dim(); ++axis) {
      if (!(sets[s] & (1u << axis))) continue;
      deconvolve_axis(g, axis, a.data(), b.data());
      a.swap(b);
    }
    const double inv_extent = 1.0 / g.extent(sets[s]);
    for (std::size_t m = 0; m < nn; ++m)
      out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(m)) = a[m] * inv_extent;
  }
  return out;
}

Eigen::VectorXd node_inner_product(const Cochain& a, const Cochain& b) {
  require_compatible(a, b);
  const Eigen::MatrixXd pa = reconstruct_at_nodes(a);
  const Eigen::MatrixXd pb = reconstruct_at_nodes(b);
  return (pa.array() * pb.array()).colwise().sum().transpose();
}

double pair_with_test(const Cochain& a, const Cochain& b, const Cochain& psi) {
  if (psi.degree() != 0 || psi.is_dual()) throw ShapeError("test function must be a primal 0-cochain");
  if (!(psi.grid() == a.grid())) throw ShapeError("test function lives on a different grid");
  const Eigen::VectorXd prod = node_inner_product(a, b);
  const double cell = a.grid().extent(a.grid().full_mask());
  return prod.dot(psi.values()) * cell;
}

// --- construction helpers ------------------------------------------------------------

Cochain sample_nodes(const PeriodicGrid& grid, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.node_count()));
  for (std::size_t m = 0; m < grid.node_count(); ++m) v[static_cast<Eigen::Index>(m)] = f(grid.node_position(m));
  return Cochain(grid, 0, std::move(v));
}

namespace {

struct GaussRule {
  std::vector<double> x;  // on [0, 1]
  std::vector<double> w;  // sums to 1
};

GaussRule gauss_rule(int points) {
  switch (points) {
    case 1:
      return {{0.5}, {1.0}};
    case 2: {
      const double d = 0.5 / std::sqrt(3.0);
      return {{0.5 - d, 0.5 + d}, {0.5, 0.5}};
    }
    case 3: {
      const double d = 0.5 * std::sqrt(0.6);
      return {{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      return {{0.5 - 0.5 * b, 0.5 - 0.5 * a, 0.5 + 0.5 * a, 0.5 + 0.5 * b},
              {0.5 * wb, 0.5 * wa, 0.5 * wa, 0.5 * wb}};
    }
    default:
      throw InvalidArgument("Gauss-Legendre rule supports 1..4 points");
  }
}

}  // namespace

Cochain integrate_form(const PeriodicGrid& grid, int degree, const FormCoefficient& f, int points) {
  const GaussRule rule = gauss_rule(points);
  const auto& sets = grid.axis_sets(degree);
  const std::size_t nn = grid.node_count();
  Eigen::VectorXd v(static_cast<Eigen::Index>(sets.size() * nn));
  const int np = static_cast<int>(rule.x.size());
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const AxisMask mask = sets[s];
    std::vector<int> axes;
    for (int a = 0; a < grid.dim(); ++a)
      if (mask & (1u << a)) axes.push_back(a);
    int total = 1;
    for (std::size_t i = 0; i < axes.size(); ++i) total *= np;
    const double extent = grid.extent(mask);
    for (std::size_t m = 0; m < nn; ++m) {
      const Point base = grid.node_position(m);
      double acc = 0.0;
      for (int t = 0; t < total; ++t) {
        Point x = base;
        double weight = 1.0;
        int r = t;
        for (int a : axes) {
          const int k = r % np;
          r /= np;
          x[a] += rule.x[k] * grid.spacing(a);
          weight *= rule.w[k];
        }
        acc += weight * f(mask, x);
      }
      v[static_cast<Eigen::Index>(s * nn + m)] = acc * extent;
    }
  }
  return Cochain(grid, degree, std::move(v));
}

Cochain parallel_form(const PeriodicGrid& grid, AxisMask mask) {
  const int q = popcount(mask);
  Cochain c = Cochain::zero(grid, q);
  Eigen::VectorXd v = c.values();
  const std::size_t nn = grid.node_count();
  const auto pos = static_cast<std::size_t>(grid.axis_set_position(mask));
  v.segment(static_cast<Eigen::Index>(pos * nn), static_cast<Eigen::Index>(nn)).setConstant(grid.extent(mask));
  return c.with_values(std::move(v));
}

}  // namespace divcurl
