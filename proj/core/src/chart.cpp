#include "divcurl/chart.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "divcurl/error.hpp"

namespace divcurl {

Chart::Chart(std::vector<int> cells, std::vector<double> lower, std::vector<double> upper,
             std::vector<bool> periodic, int codim)
    : dim_(static_cast<int>(cells.size())),
      codim_(codim),
      cells_(std::move(cells)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      periodic_(std::move(periodic)) {
  if (dim_ != 2 && dim_ != 3) throw InvalidArgument("chart dimension must be 2 or 3");
  if (codim_ < 1) throw InvalidArgument("chart codimension must be >= 1");
  if (static_cast<int>(lower_.size()) != dim_ || static_cast<int>(upper_.size()) != dim_ ||
      static_cast<int>(periodic_.size()) != dim_)
    throw ShapeError("chart box/periodicity length does not match the resolution");
  for (int a = 0; a < dim_; ++a) {
    if (cells_[a] < 8) throw InvalidArgument("chart resolution must be >= 8 on every axis");
    if (!std::isfinite(lower_[a]) || !std::isfinite(upper_[a]) || !(upper_[a] > lower_[a]))
      throw InvalidArgument("chart box must have finite lower < upper on every axis");
    points_.push_back(periodic_[a] ? cells_[a] : cells_[a] + 1);
  }
  stride_.fill(0);
  std::size_t s = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    stride_[a] = s;
    s *= static_cast<std::size_t>(points_[a]);
  }
  nodes_ = s;
}

double Chart::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing(a);
  return v;
}

NodeIndex Chart::multi_index(std::size_t node) const {
  NodeIndex m{0, 0, 0};
  for (int a = 0; a < dim_; ++a) m[a] = static_cast<int>((node / stride_[a]) % points_[a]);
  return m;
}

std::size_t Chart::node_index(const NodeIndex& m) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    int v = m[a];
    if (periodic_[a]) {
      v %= points_[a];
      if (v < 0) v += points_[a];
    } else if (v < 0 || v >= points_[a]) {
      throw InvalidArgument("node index outside a non-periodic chart axis");
    }
    idx += static_cast<std::size_t>(v) * stride_[a];
  }
  return idx;
}

long long Chart::neighbour(std::size_t node, int axis, int offset) const {
  const int i = static_cast<int>((node / stride_[axis]) % points_[axis]);
  int j = i + offset;
  if (periodic_[axis]) {
    j %= points_[axis];
    if (j < 0) j += points_[axis];
  } else if (j < 0 || j >= points_[axis]) {
    return -1;
  }
  return static_cast<long long>(node) + (static_cast<long long>(j) - i) * static_cast<long long>(stride_[axis]);
}

Point Chart::coordinate(std::size_t node) const {
  const NodeIndex m = multi_index(node);
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = lower_[a] + m[a] * spacing(a);
  return x;
}

bool Chart::interior(std::size_t node, int margin) const {
  const NodeIndex m = multi_index(node);
  for (int a = 0; a < dim_; ++a) {
    if (periodic_[a]) continue;
    if (m[a] < margin || m[a] > points_[a] - 1 - margin) return false;
  }
  return true;
}

Chart Chart::with_codim(int codim) const { return Chart(cells_, lower_, upper_, periodic_, codim); }

bool Chart::operator==(const Chart& o) const {
  return dim_ == o.dim_ && codim_ == o.codim_ && cells_ == o.cells_ && lower_ == o.lower_ &&
         upper_ == o.upper_ && periodic_ == o.periodic_;
}

namespace {

struct Stencil {
  int first;  // offset of the first weight
  std::vector<double> w;  // integer weights, so constants differentiate to exactly zero
  double denominator;
};

// Stencil for position i of `count` along an axis (non-periodic ends handled one-sided).
Stencil stencil_for(int i, int count, bool periodic, int order) {
  if (order == 2) {
    if (periodic || (i > 0 && i < count - 1)) return {-1, {-1, 0, 1}, 2};
    if (i == 0) return {0, {-3, 4, -1}, 2};
    return {-2, {1, -4, 3}, 2};
  }
  if (periodic || (i > 1 && i < count - 2)) return {-2, {1, -8, 0, 8, -1}, 12};
  if (i == 0) return {0, {-25, 48, -36, 16, -3}, 12};
  if (i == 1) return {-1, {-3, -10, 18, -6, 1}, 12};
  if (i == count - 2) return {-3, {-1, 6, -18, 10, 3}, 12};
  return {-4, {3, -16, 36, -48, 25}, 12};
}

}  // namespace

Eigen::MatrixXd differentiate(const Chart& chart, const Eigen::MatrixXd& values, int axis, int order) {
  if (order != 2 && order != 4) throw InvalidArgument("finite-difference order must be 2 or 4");
  if (axis < 0 || axis >= chart.dim()) throw InvalidArgument("derivative axis out of range");
  if (values.cols() != static_cast<Eigen::Index>(chart.node_count()))
    throw ShapeError("field column count does not match the chart");
  const int count = chart.points(axis);
  const bool periodic = chart.periodic(axis);
  const double h = chart.spacing(axis);

  // Stencils depend only on the position along the axis; build them once.
  std::vector<Stencil> stencils;
  stencils.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) stencils.push_back(stencil_for(i, count, periodic, order));

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(values.rows(), values.cols());
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const int i = chart.multi_index(node)[axis];
    const Stencil& s = stencils[static_cast<std::size_t>(i)];
    auto col = out.col(static_cast<Eigen::Index>(node));
    for (std::size_t t = 0; t < s.w.size(); ++t) {
      if (s.w[t] == 0.0) continue;
      const long long nb = chart.neighbour(node, axis, s.first + static_cast<int>(t));
      col += s.w[t] * values.col(static_cast<Eigen::Index>(nb));
    }
    col /= s.denominator * h;
  }
  return out;
}

ImmersionField::ImmersionField(Chart chart, Eigen::MatrixXd points)
    : chart_(std::move(chart)), points_(std::move(points)) {
  if (points_.rows() != chart_.ambient_dim() || points_.cols() != static_cast<Eigen::Index>(chart_.node_count()))
    throw ShapeError("immersion field must be (n + k) x node_count");
  if (!points_.allFinite()) throw InvalidArgument("immersion field has non-finite entries");
}

MetricField::MetricField(Chart chart, Eigen::MatrixXd components)
    : chart_(std::move(chart)), components_(std::move(components)) {
  const int n = chart_.dim();
  if (components_.rows() != n * n || components_.cols() != static_cast<Eigen::Index>(chart_.node_count()))
    throw ShapeError("metric field must be (n * n) x node_count");
  if (!components_.allFinite()) throw InvalidArgument("metric field has non-finite entries");
  for (std::size_t node = 0; node < chart_.node_count(); ++node) {
    const Eigen::MatrixXd g = at(node);
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw GeometryError("metric is not symmetric", node);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 1e-8)) throw GeometryError("metric is not positive definite", node);
  }
}

Eigen::MatrixXd MetricField::at(std::size_t node) const {
  const int n = chart_.dim();
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = components_(i * n + j, static_cast<Eigen::Index>(node));
  return g;
}

MetricField MetricField::identity(const Chart& chart) {
  const int n = chart.dim();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n * n, static_cast<Eigen::Index>(chart.node_count()));
  for (int i = 0; i < n; ++i) c.row(i * n + i).setOnes();
  return MetricField(chart, std::move(c));
}

ImmersionField sample_immersion(const Chart& chart, const PointMap& f) {
  Eigen::MatrixXd p(chart.ambient_dim(), static_cast<Eigen::Index>(chart.node_count()));
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const Eigen::VectorXd v = f(chart.coordinate(node));
    if (v.size() != chart.ambient_dim()) throw ShapeError("immersion map returned the wrong ambient dimension");
    p.col(static_cast<Eigen::Index>(node)) = v;
  }
  return ImmersionField(chart, std::move(p));
}

MetricField sample_metric(const Chart& chart, const MatrixMap& g) {
  const int n = chart.dim();
  Eigen::MatrixXd c(n * n, static_cast<Eigen::Index>(chart.node_count()));
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const Eigen::MatrixXd m = g(chart.coordinate(node));
    if (m.rows() != n || m.cols() != n) throw ShapeError("metric map returned the wrong shape");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i * n + j, static_cast<Eigen::Index>(node)) = m(i, j);
  }
  return MetricField(chart, std::move(c));
}

}  // namespace divcurl
