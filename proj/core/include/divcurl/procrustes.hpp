#pragma once

// Weighted orthogonal Procrustes alignment of two sampled immersions on one chart.

#include <Eigen/Core>

#include "divcurl/chart.hpp"

namespace divcurl {

struct RigidMotion {
  Eigen::MatrixXd rotation;  // orthogonal, possibly improper
  Eigen::VectorXd translation;
  double rms = 0.0;          // weighted rms of |rotation·f1 + translation - f2| over nodes
  bool reflection = false;   // det(rotation) < 0
};

/// Node quadrature weights: cell volume, halved per non-periodic end an index sits on.
Eigen::VectorXd node_weights(const Chart& chart);

/// Minimizes sum_nodes w |Q f1 + t - f2|^2 over orthogonal Q (reflections allowed) and t.
/// Throws GeometryError when the centred f1 cloud has rank below dim.
RigidMotion rigid_motion_align(const ImmersionField& f1, const ImmersionField& f2);

/// Applies x -> Q x + t to every node.
ImmersionField apply(const RigidMotion& motion, const ImmersionField& f);

}  // namespace divcurl
