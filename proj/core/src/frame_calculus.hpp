#pragma once

// Frame-contracted quantities shared by the GCR checks and the Cartan connection forms.
// Everything here is indexed by the orthonormal tangent frame e_a = sum_i E(i,a) ∂_i and
// the normal frame η_α of a FundamentalData.

#include <vector>

#include <Eigen/Core>

#include "divcurl/chart.hpp"
#include "divcurl/geometry.hpp"

namespace divcurl::detail {

/// Derivatives of sampled B, ∇⊥ and frame coefficients use second-order stencils.
inline constexpr int kSampledStencilOrder = 2;

struct FrameCalculus {
  Chart chart;
  int n = 0;
  int k = 0;
  Eigen::MatrixXd e;        // row i*n + a: E(i, a)
  Eigen::MatrixXd e_inv;    // row a*n + i: E^{-1}(a, i)
  Eigen::MatrixXd b;        // row (α*n + a)*n + c: B(e_a, e_c, η_α)
  Eigen::MatrixXd nc;       // row (a*k + α)*k + β: <∇⊥_{e_a} η_α, η_β>
  Eigen::MatrixXd levi;     // row (a*n + b)*n + c: <∇_{e_a} e_b, e_c>
  Eigen::MatrixXd bracket;  // row (a*n + b)*n + c: e_c component of [e_a, e_b]
  Eigen::MatrixXd div;      // row a: div e_a
  Eigen::VectorXd sqrt_det; // sqrt(det g) per node

  double ec(std::size_t node, int i, int a) const { return e(i * n + a, static_cast<Eigen::Index>(node)); }

  /// e_a applied to every row of a (rows x nodes) scalar field matrix, one matrix per a.
  std::vector<Eigen::MatrixXd> along_frame(const Eigen::MatrixXd& fields) const;
  /// Coordinate exterior derivative of 1-forms given by coordinate components
  /// (row f*n + i = form f evaluated on ∂_i), returned on frame pairs:
  /// row (f*n + a)*n + b = dα_f(e_a, e_b).
  Eigen::MatrixXd exterior_derivative_on_frame(const Eigen::MatrixXd& coordinate_forms) const;
  /// Intrinsic divergence (1/√g) ∂_i(√g V^i) of vector fields given by frame components
  /// (row v*n + a = component a of field v).
  Eigen::MatrixXd divergence(const Eigen::MatrixXd& frame_fields) const;
};

/// Frame-contracted B, ∇⊥, Levi-Civita coefficients (Christoffels of g) and brackets.
FrameCalculus frame_calculus(const MetricField& g, const FundamentalData& fd);

/// Metric field reconstructed from the frame coefficients of fd.
MetricField frame_metric(const FundamentalData& fd);

/// sup and l2 over nodes at least `margin` steps away from non-periodic ends.
void aggregate(const Chart& chart, const Eigen::MatrixXd& values, int margin, double& sup, double& l2);

}  // namespace divcurl::detail
