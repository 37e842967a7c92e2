#pragma once

// Krylov and block eigen solvers on matrix-free operators. All of them work in a
// diagonal weighted inner product <x, y>_w = sum x_i y_i w_i unless stated otherwise.

#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace divcurl {

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct CgOptions {
  double tol = 1e-8;  // on the weighted residual norm, relative to the projected right-hand side
  int max_iterations = 20000;
};

struct CgResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual = 0.0;
};

/// Conjugate gradients for A x = b with A self-adjoint and positive semi-definite in the
/// w-inner product. The columns of `deflation` must be w-orthonormal and span ker A; b and
/// every iterate are projected onto their w-orthogonal complement, so the returned x is
/// the minimum-norm solution of the consistent part of the system.
/// Throws SolverError when the tolerance is not reached.
CgResult deflated_cg(const LinearMap& apply, const Eigen::VectorXd& b, const Eigen::VectorXd& weights,
                     const Eigen::MatrixXd& deflation, const CgOptions& options = {});

/// x - Z Z^T W x: removes the span of w-orthonormal columns Z.
Eigen::VectorXd project_out(const Eigen::VectorXd& x, const Eigen::MatrixXd& basis, const Eigen::VectorXd& weights);

/// Gram-Schmidt (twice) of the columns in the w-inner product; drops columns whose
/// remaining norm falls below `drop` times their original norm.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& columns, const Eigen::VectorXd& weights, double drop = 1e-10);

struct EigenResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // Euclidean-orthonormal columns
  int iterations = 0;
  bool converged = false;
};

/// Smallest `block` eigenpairs of a symmetric positive semi-definite operator on R^n by
/// LOBPCG with Rayleigh-Ritz on [X, R, P]. Only the first `wanted` columns have to meet
/// ||A x - lambda x|| <= abs_tol.
EigenResult lobpcg_smallest(const LinearMap& apply, Eigen::Index n, int block, int wanted, double abs_tol,
                            int max_iterations, std::uint64_t seed);

/// Largest eigenvalue of a symmetric positive semi-definite operator on R^n by power
/// iteration (a lower bound that is tight after enough iterations).
double power_iteration(const LinearMap& apply, Eigen::Index n, int iterations, std::uint64_t seed);

/// ||A^{-1/2} v||_w for A self-adjoint positive definite in the w-inner product, from a
/// `steps`-term Lanczos recurrence with full reorthogonalization (stops early on breakdown,
/// where the result is exact).
double lanczos_inverse_sqrt_norm(const LinearMap& apply, const Eigen::VectorXd& v, const Eigen::VectorXd& weights,
                                 int steps = 5);

}  // namespace divcurl
