#pragma once

// Gauss, Codazzi and Ricci residuals of sampled immersion data, and the same equations
// rewritten as pairings of the V and Ω fields.
//
// Every residual is evaluated on the orthonormal frame fields X, Y, Z, W ∈ {e_a} and
// ξ, η ∈ {η_α}; by multilinearity these index combinations cover all vector fields.
// Derivatives of sampled B, ∇⊥ and of the frame use second-order stencils; aggregates skip
// nodes within one step of a non-periodic end.

#include <Eigen/Core>

#include "divcurl/chart.hpp"
#include "divcurl/geometry.hpp"

namespace divcurl {

struct ResidualField {
  Eigen::MatrixXd values;  // one row per index combination, one column per node
  double sup = 0.0;
  double l2 = 0.0;
};

/// gauss row ((a*n + b)*n + c)*n + d; codazzi row ((a*n + b)*n + c)*k + α;
/// ricci row ((a*n + b)*k + α)*k + β.
struct GcrResiduals {
  ResidualField gauss;
  ResidualField codazzi;
  ResidualField ricci;  // identically zero in codimension one

  double max_sup() const;
};

/// Left minus right side of each equation with R taken from riemann_curvature(g).
GcrResiduals gcr_residuals(const MetricField& g, const FundamentalData& fd);

/// Frame components of the V fields and frame values of the Ω forms:
///   V^B_{c,α}(e_a, e_b) = B(e_a,e_c,η_α) e_b - B(e_b,e_c,η_α) e_a,  Ω^B_{c,α} = -B(·, e_c, η_α),
///   V^⊥_{α,β}(e_a, e_b) = <∇⊥_{e_b}η_α,η_β> e_a - <∇⊥_{e_a}η_α,η_β> e_b,  Ω^⊥_{α,β} = <∇⊥_· η_α, η_β>.
struct VOmegaFields {
  Chart chart;
  int n = 0;
  int k = 0;
  Eigen::MatrixXd v_b;      // row (((c*k + α)*n + a)*n + b)*n + e
  Eigen::MatrixXd omega_b;  // row (c*k + α)*n + d
  Eigen::MatrixXd v_n;      // row (((α*k + β)*n + a)*n + b)*n + e
  Eigen::MatrixXd omega_n;  // row (α*k + β)*n + d

  Eigen::Index vb_row(int c, int alpha, int a, int b, int e) const { return (((c * k + alpha) * n + a) * n + b) * n + e; }
  Eigen::Index vn_row(int alpha, int beta, int a, int b, int e) const {
    return (((alpha * k + beta) * n + a) * n + b) * n + e;
  }
  /// max |V(X,Y) + V(Y,X)| over both families.
  double antisymmetry_defect() const;
};

VOmegaFields build_v_omega(const FundamentalData& fd);

struct DivCurlIdentity {
  /// div V - dΩ - [linear terms] for V^B (row ((c*k + α)*n + a)*n + b) and V^⊥
  /// (row ((α*k + β)*n + a)*n + b).
  ResidualField b_family;
  ResidualField normal_family;
  /// max relative difference between div V from the intrinsic formula (1/√g)∂_i(√g V^i)
  /// and from the product-rule expansion Y B(X,Z,η) - X B(Y,Z,η) + B(X,Z,η) div Y - ...
  double expansion_agreement = 0.0;
};

/// div V from the intrinsic formula, dΩ(X,Y) from coordinate differences of Ω, and the
/// linear terms (div X, div Y, [X,Y] contractions) from the frame.
DivCurlIdentity divcurl_identity_check(const VOmegaFields& vo, const FundamentalData& fd);

/// Residuals of the three equations written as V/Ω pairings. dΩ is taken by coordinate
/// differences of the Ω components, which is a discretization independent of the frame
/// derivatives used in gcr_residuals. The Codazzi residual comes out with the opposite
/// sign of the direct one.
GcrResiduals reformulated_gcr_residuals(const VOmegaFields& vo, const FundamentalData& fd, const MetricField& g,
                                        const CurvatureField& r);

/// True when both values are below `floor` or they are within `factor` of each other.
bool residuals_agree(double a, double b, double factor = 10.0, double floor = 1e-10);

}  // namespace divcurl
