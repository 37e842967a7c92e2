#pragma once

// Axis-aligned coordinate charts with sampled fields and finite-difference derivatives.
//
// A periodic axis with N cells carries N nodes (the right end is the left end); a
// non-periodic axis carries N + 1 nodes including both ends. Fields are stored as
// (components x nodes) matrices, node index with axis 0 slowest.

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "divcurl/grid.hpp"

namespace divcurl {

class Chart {
 public:
  Chart(std::vector<int> cells, std::vector<double> lower, std::vector<double> upper,
        std::vector<bool> periodic, int codim = 1);

  int dim() const noexcept { return dim_; }
  int codim() const noexcept { return codim_; }
  int ambient_dim() const noexcept { return dim_ + codim_; }

  int cells(int axis) const { return cells_[axis]; }
  int points(int axis) const { return points_[axis]; }
  bool periodic(int axis) const { return periodic_[axis]; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  double spacing(int axis) const { return (upper_[axis] - lower_[axis]) / cells_[axis]; }
  /// Product of the spacings: the coordinate volume attached to one node.
  double cell_volume() const;

  std::size_t node_count() const noexcept { return nodes_; }
  NodeIndex multi_index(std::size_t node) const;
  /// Periodic components wrap; out-of-range non-periodic components throw.
  std::size_t node_index(const NodeIndex& m) const;
  /// Neighbour `offset` steps along `axis`, or -1 when it falls off a non-periodic end.
  long long neighbour(std::size_t node, int axis, int offset) const;
  Point coordinate(std::size_t node) const;

  /// False for nodes closer than `margin` steps to a non-periodic boundary.
  bool interior(std::size_t node, int margin) const;

  /// Same geometry with another codimension.
  Chart with_codim(int codim) const;

  bool operator==(const Chart& other) const;

 private:
  int dim_;
  int codim_;
  std::vector<int> cells_;
  std::vector<int> points_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<bool> periodic_;
  std::array<std::size_t, 3> stride_{};
  std::size_t nodes_ = 1;
};

/// Derivative along `axis` of every row of `values` (components x nodes). `order` is 2
/// or 4: centred stencils in the interior, one-sided stencils of the same order at
/// non-periodic ends.
Eigen::MatrixXd differentiate(const Chart& chart, const Eigen::MatrixXd& values, int axis, int order);

/// Points of an immersion f: U -> R^{n+k}, one column per node.
class ImmersionField {
 public:
  ImmersionField(Chart chart, Eigen::MatrixXd points);

  const Chart& chart() const noexcept { return chart_; }
  const Eigen::MatrixXd& points() const noexcept { return points_; }
  Eigen::VectorXd point(std::size_t node) const { return points_.col(static_cast<Eigen::Index>(node)); }

 private:
  Chart chart_;
  Eigen::MatrixXd points_;
};

/// Symmetric positive-definite n x n matrix per node, stored row-major in n*n rows.
class MetricField {
 public:
  MetricField(Chart chart, Eigen::MatrixXd components);

  const Chart& chart() const noexcept { return chart_; }
  const Eigen::MatrixXd& components() const noexcept { return components_; }
  Eigen::MatrixXd at(std::size_t node) const;

  static MetricField identity(const Chart& chart);

 private:
  Chart chart_;
  Eigen::MatrixXd components_;
};

using PointMap = std::function<Eigen::VectorXd(const Point&)>;
using MatrixMap = std::function<Eigen::MatrixXd(const Point&)>;

ImmersionField sample_immersion(const Chart& chart, const PointMap& f);
MetricField sample_metric(const Chart& chart, const MatrixMap& g);

}  // namespace divcurl
