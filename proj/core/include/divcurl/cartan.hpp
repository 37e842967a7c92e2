#pragma once

// Cartan connection forms of sampled immersion data and the realization of an immersion
// from them.
//
// A is the (n+k) x (n+k) matrix whose rows are the frame (e_1..e_n, η_1..η_k), so that
// W = dA·Aᵀ has entries W_ab = <d F_a, F_b> and df = w·A with w = (ω¹..ωⁿ, 0..0). Taking d
// of both relations gives the structural equations dw = w∧W and dW = W∧W, where
// (α∧β)(X,Y) = α(X)β(Y) - α(Y)β(X) with matrix products for matrix-valued forms.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "divcurl/chart.hpp"
#include "divcurl/gcr.hpp"
#include "divcurl/geom_io.hpp"
#include "divcurl/geometry.hpp"

namespace divcurl {

struct FramePack {
  Chart chart;
  int n = 0;
  int k = 0;
  Eigen::MatrixXd w;  // row i*(n+k) + a: w_a(∂_i); rows with a >= n are zero
  Eigen::MatrixXd W;  // row (i*(n+k) + a)*(n+k) + b: W_ab(∂_i)

  int ambient() const noexcept { return n + k; }
  Eigen::MatrixXd w_at(std::size_t node, int axis) const;  // 1 x (n+k)
  Eigen::MatrixXd W_at(std::size_t node, int axis) const;  // (n+k) x (n+k)
  /// max |W_ab + W_ba| and max |w_a| for a >= n.
  double antisymmetry_defect() const;
  double padding_defect() const;
};

/// Default tolerance on |EᵀgE - I| for connection_forms.
inline constexpr double kFrameOrthonormalityTolerance = 5e-2;

/// Coframe, Levi-Civita block (from the Christoffel symbols of g), mixed block
/// W_{a,n+α}(∂_i) = B(∂_i, e_a, η_α) and the normal block from the normal connection.
/// Throws GeometryError when the tangent frame of fd is not orthonormal for g.
FramePack connection_forms(const MetricField& g, const FundamentalData& fd,
                           double tolerance = kFrameOrthonormalityTolerance);

/// first: dw - w∧W, row (a*n + i)*n + j for a < n + k on coordinate pairs (∂_i, ∂_j);
/// second: dW - W∧W, row ((a*m + b)*n + i)*n + j with m = n + k.
/// d uses second-order stencils; aggregates skip nodes next to non-periodic ends.
struct StructuralResiduals {
  ResidualField first;
  ResidualField second;
};

StructuralResiduals structural_residuals(const FramePack& fp);

enum class SpanningTree {
  comb_last_axis,   // step back along the fastest axis first: teeth run along the last axis
  comb_first_axis,  // teeth run along axis 0
};

struct FrameIntegral {
  Chart chart;
  int m = 0;                 // ambient dimension n + k
  std::size_t base = 0;
  Eigen::MatrixXd A;         // row a*m + b: A(a, b); empty until solve_pfaff
  Eigen::MatrixXd f;         // m x nodes; empty until solve_poincare
  double holonomy_defect = 0.0;     // max over non-tree edges of |A transported - A|_F
  double closedness_defect = 0.0;   // max over non-tree edges of |f(u) + ∫ w·A - f(v)|
  double orthogonality_drift = 0.0;  // max |AᵀA - I| after projection
  double projection_correction = 0.0;  // max |AᵀA - I| of the RK4 step before projection

  Eigen::MatrixXd A_at(std::size_t node) const;
  ImmersionField immersion() const;
};

/// Integrates dA = W·A along the spanning tree rooted at `base` with one RK4 step per
/// edge (W at the edge midpoint from cubic interpolation) and a polar projection back
/// onto O(n+k) after each step. dA = W·A is W = dA·Aᵀ multiplied by A, using AᵀA = I.
FrameIntegral solve_pfaff(const FramePack& fp, const Eigen::MatrixXd& A0, std::size_t base,
                          SpanningTree tree = SpanningTree::comb_last_axis);

/// Integrates df = w·A over the same tree with Simpson's rule (A at the edge midpoint from
/// the Hermite cubic with end slopes W·A); f(base) = f0.
FrameIntegral solve_poincare(const FramePack& fp, FrameIntegral fi, const Eigen::VectorXd& f0,
                             SpanningTree tree = SpanningTree::comb_last_axis);

/// sup over interior nodes of |∂_i A·Aᵀ - W(∂_i)| with second-order differences.
double pfaff_relation_residual(const FramePack& fp, const FrameIntegral& fi);

/// The frame matrix A (rows e_a then η_α) of fd at one node.
Eigen::MatrixXd frame_at(const FundamentalData& fd, std::size_t node);

/// Parent of `node` in the spanning tree rooted at `base`, or -1 for the root.
long long tree_parent(const Chart& chart, std::size_t node, std::size_t base, SpanningTree tree);

GeomRecord to_record(const FramePack& fp);
GeomRecord to_record(const FrameIntegral& fi);
FrameIntegral frame_integral_from_record(const GeomRecord& r);

}  // namespace divcurl
