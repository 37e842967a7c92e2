#pragma once

// Chart-local Riemannian geometry of sampled metrics and immersions.
//
// Curvature convention: R(X,Y,Z,W) = <R(X,Y)Z, W> with R(X,Y) = [∇_X, ∇_Y] - ∇_[X,Y].
// Then R(X,Y,Y,X) = K (|X|²|Y|² - <X,Y>²) and the Gauss equation reads
// <B(X,W), B(Y,Z)> - <B(Y,W), B(X,Z)> = R(X,Y,Z,W).

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "divcurl/chart.hpp"

namespace divcurl {

/// First derivatives use fourth-order stencils; second derivatives compose two of them.
inline constexpr int kGeometryStencilOrder = 4;

/// g_ij = ∂_i f · ∂_j f. Throws GeometryError where the Jacobian loses rank
/// (smallest singular value <= 1e-6).
MetricField induced_metric(const ImmersionField& f);

struct DefectNorms {
  double sup = 0.0;
  double l2 = 0.0;  // sqrt(sum over nodes of |entries|² times the node volume)
};

/// Norms of induced_metric(f) - g over nodes at least one step from a non-periodic end.
DefectNorms isometry_defect(const ImmersionField& f, const MetricField& g);

/// Γ^k_ij at row (k*n + i)*n + j.
Eigen::MatrixXd christoffel_symbols(const MetricField& g);

struct CurvatureField {
  Chart chart;
  int n = 0;
  Eigen::MatrixXd components;  // R_ijkl at row ((i*n + j)*n + k)*n + l
  double bianchi_residual = 0.0;  // max |R_ijkl + R_jkil + R_kijl| / max |R|

  double at(std::size_t node, int i, int j, int k, int l) const {
    return components(((i * n + j) * n + k) * n + l, static_cast<Eigen::Index>(node));
  }
};

/// Christoffels from fourth-order differences of g, then R_ijkl from the lowered formula
/// that keeps the pair antisymmetries exact.
CurvatureField riemann_curvature(const MetricField& g);

/// K(∂_i, ∂_j) = R(∂_i,∂_j,∂_j,∂_i) / (g_ii g_jj - g_ij²) at every node.
Eigen::VectorXd sectional_curvature(const CurvatureField& r, const MetricField& g, int i = 0, int j = 1);

/// Orthonormal frames and the immersion-dependent data of an immersion.
///
/// The tangent frame e_a = sum_i E(i,a) ∂_i f comes from Gram-Schmidt on the coordinate
/// derivatives. B^α_ij = η_α · ∂_i∂_j f is stored with coordinate indices i, j and
/// normal_conn(j, α, β) = <∂_j η_α, η_β> is antisymmetrized in (α, β).
struct FundamentalData {
  Chart chart;
  int n = 0;
  int k = 0;
  Eigen::MatrixXd tangent;             // row a*(n+k) + c: component c of e_a
  Eigen::MatrixXd normal;              // row α*(n+k) + c: component c of η_α
  Eigen::MatrixXd frame_coefficients;  // row i*n + a: E(i, a)
  Eigen::MatrixXd second_form;         // row (α*n + i)*n + j: B^α_ij
  Eigen::MatrixXd normal_conn;         // row (j*k + α)*k + β

  int ambient() const noexcept { return n + k; }
  double b(std::size_t node, int alpha, int i, int j) const {
    return second_form((alpha * n + i) * n + j, static_cast<Eigen::Index>(node));
  }
  double conn(std::size_t node, int j, int alpha, int beta) const {
    return normal_conn((j * k + alpha) * k + beta, static_cast<Eigen::Index>(node));
  }
  Eigen::MatrixXd frame_matrix(std::size_t node) const;  // E, n x n
  /// The metric the frame is orthonormal for: g = E^{-T} E^{-1}.
  Eigen::MatrixXd metric(std::size_t node) const;
  /// Index-raised form S_α = g^{-1} B^α (shape operator in coordinates).
  Eigen::MatrixXd shape_operator(std::size_t node, int alpha) const;

  /// Max deviation from orthonormality over all frames, and the symmetry and
  /// antisymmetry defects of B and normal_conn.
  double frame_defect() const;
  double symmetry_defect() const;
};

struct FrameOptions {
  /// Reference vectors seeding Gram-Schmidt for the normal frame, tried in order; a
  /// candidate is accepted when its normal projection has norm >= 0.3. Empty means: in
  /// codimension one use the oriented cofactor normal, otherwise the ambient basis.
  std::vector<Eigen::VectorXd> normal_references;
  /// +1 or -1; multiplies the cofactor normal in codimension one.
  int orientation = 1;
};

/// Frames, B and the normal connection. Frames are sign-aligned with the previous node
/// of the row-major sweep; a frame dot product below 0.9 between such neighbours throws
/// GeometryError (the sampling is too coarse for the frame to be followed).
FundamentalData fundamental_data(const ImmersionField& f, const FrameOptions& options = {});

}  // namespace divcurl
