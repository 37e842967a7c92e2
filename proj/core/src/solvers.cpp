#include "divcurl/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "divcurl/error.hpp"

namespace divcurl {

namespace {

double wdot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
  return (a.array() * b.array() * w.array()).sum();
}

}  // namespace

Eigen::VectorXd project_out(const Eigen::VectorXd& x, const Eigen::MatrixXd& basis, const Eigen::VectorXd& weights) {
  if (basis.cols() == 0) return x;
  const Eigen::VectorXd coeff = basis.transpose() * (weights.array() * x.array()).matrix();
  return x - basis * coeff;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& columns, const Eigen::VectorXd& weights, double drop) {
  Eigen::MatrixXd out(columns.rows(), columns.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::VectorXd v = columns.col(j);
    const double original = std::sqrt(wdot(v, v, weights));
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index k = 0; k < kept; ++k) v -= wdot(out.col(k), v, weights) * out.col(k);
    const double norm = std::sqrt(wdot(v, v, weights));
    if (norm <= drop * original) continue;
    out.col(kept++) = v / norm;
  }
  return out.leftCols(kept);
}

CgResult deflated_cg(const LinearMap& apply, const Eigen::VectorXd& b, const Eigen::VectorXd& weights,
                     const Eigen::MatrixXd& deflation, const CgOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  const Eigen::VectorXd rhs = project_out(b, deflation, weights);
  const double rhs_norm = std::sqrt(wdot(rhs, rhs, weights));
  CgResult result;
  result.x = Eigen::VectorXd::Zero(b.size());
  if (rhs_norm == 0.0) return result;

  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  double rr = wdot(r, r, weights);
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd ap = project_out(apply(p), deflation, weights);
    const double pap = wdot(p, ap, weights);
    if (!(pap > 0.0)) {
      throw SolverError("conjugate gradients lost positivity", it, std::sqrt(rr) / rhs_norm);
    }
    const double alpha = rr / pap;
    result.x += alpha * p;
    r -= alpha * ap;
    const double rr_new = wdot(r, r, weights);
    result.iterations = it;
    result.residual = std::sqrt(rr_new) / rhs_norm;
    if (result.residual <= options.tol) {
      // confirm against the true residual; the recursive one drifts at tight tolerances
      const Eigen::VectorXd true_r = rhs - project_out(apply(result.x), deflation, weights);
      const double true_res = std::sqrt(wdot(true_r, true_r, weights)) / rhs_norm;
      if (true_res <= options.tol) {
        result.residual = true_res;
        result.x = project_out(result.x, deflation, weights);
        return result;
      }
      r = true_r;
      p = r;
      rr = wdot(r, r, weights);
      continue;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  throw SolverError("conjugate gradients did not converge", result.iterations, result.residual);
}

EigenResult lobpcg_smallest(const LinearMap& apply, Eigen::Index n, int block, int wanted, double abs_tol,
                            int max_iterations, std::uint64_t seed) {
  if (block < 1 || block > n) throw InvalidArgument("LOBPCG block size out of range");
  wanted = std::clamp(wanted, 1, block);
  const Eigen::VectorXd unit = Eigen::VectorXd::Ones(n);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
  x = orthonormalize(x, unit);

  auto apply_block = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out(n, m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = apply(m.col(j));
    return out;
  };

  EigenResult result;
  Eigen::MatrixXd ax = apply_block(x);
  Eigen::MatrixXd p(n, 0);

  for (int it = 0; it < max_iterations; ++it) {
    // Rayleigh-Ritz on the current block
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(x.transpose() * ax);
    const Eigen::MatrixXd c = small.eigenvectors();
    x = x * c;
    ax = ax * c;
    const Eigen::VectorXd lambda = small.eigenvalues();
    const Eigen::MatrixXd r = ax - x * lambda.asDiagonal();

    bool done = true;
    for (int j = 0; j < wanted; ++j)
      if (r.col(j).norm() > abs_tol) done = false;
    result.values = lambda;
    result.vectors = x;
    result.iterations = it;
    if (done) {
      result.converged = true;
      return result;
    }

    Eigen::MatrixXd basis(n, x.cols() + r.cols() + p.cols());
    basis << x, r, p;
    basis = orthonormalize(basis, unit, 1e-12);
    const Eigen::MatrixXd ab = apply_block(basis);
    Eigen::MatrixXd h = basis.transpose() * ab;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(h);
    const Eigen::MatrixXd coeff = rr.eigenvectors().leftCols(block);
    const Eigen::MatrixXd x_new = basis * coeff;
    // search direction: the part of the update outside the old block
    p = x_new - x * (x.transpose() * x_new);
    x = orthonormalize(x_new, unit);
    if (x.cols() < block) throw SolverError("LOBPCG block lost rank", it, 0.0);
    ax = apply_block(x);
  }
  result.converged = false;
  return result;
}

double power_iteration(const LinearMap& apply, Eigen::Index n, int iterations, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd av = apply(v);
    lambda = v.dot(av);
    const double norm = av.norm();
    if (norm == 0.0) return 0.0;
    v = av / norm;
  }
  return lambda;
}

double lanczos_inverse_sqrt_norm(const LinearMap& apply, const Eigen::VectorXd& v, const Eigen::VectorXd& weights,
                                 int steps) {
  const double vnorm = std::sqrt(wdot(v, v, weights));
  if (vnorm == 0.0) return 0.0;
  if (steps < 1) throw InvalidArgument("Lanczos needs at least one step");
  std::vector<Eigen::VectorXd> q{v / vnorm};
  std::vector<double> alpha, beta;
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd w = apply(q.back());
    const double a = wdot(q.back(), w, weights);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) w -= wdot(qi, w, weights) * qi;
    const double b = std::sqrt(wdot(w, w, weights));
    if (k + 1 == steps || b <= 1e-13 * std::abs(a)) break;
    beta.push_back(b);
    q.push_back(w / b);
  }
  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    t(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  const Eigen::VectorXd theta = es.eigenvalues();
  if (theta.minCoeff() <= 0.0) throw SolverError("Lanczos matrix is not positive definite", static_cast<int>(m), 0.0);
  const Eigen::MatrixXd& u = es.eigenvectors();
  const Eigen::VectorXd fe1 = u * (theta.array().rsqrt().matrix().asDiagonal() * u.row(0).transpose());
  return vnorm * fe1.norm();
}

}  // namespace divcurl
