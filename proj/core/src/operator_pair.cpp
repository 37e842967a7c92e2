#include "divcurl/operator_pair.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "divcurl/error.hpp"
#include "divcurl/solvers.hpp"

namespace divcurl {

namespace {

Eigen::VectorXd ones_if_empty(Eigen::VectorXd g, Eigen::Index n, const char* name) {
  if (g.size() == 0) return Eigen::VectorXd::Ones(n);
  if (g.size() != n) throw ShapeError(std::string("Gram vector for ") + name + " has the wrong length");
  if (!(g.array() > 0.0).all() || !g.allFinite()) throw InvalidArgument(std::string("Gram for ") + name + " must be positive");
  return g;
}

// diag(left) * m * diag(right)
SparseMatrix scaled(const SparseMatrix& m, const Eigen::VectorXd& left, const Eigen::VectorXd& right) {
  SparseMatrix out = m;
  for (Eigen::Index r = 0; r < out.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(out, r); it; ++it) it.valueRef() *= left[it.row()] * right[it.col()];
  return out;
}

double max_abs(const SparseMatrix& m) {
  double v = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

double weighted_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  return std::sqrt((x.array().square() * w.array()).sum());
}

double gershgorin(const SparseMatrix& a) {
  double bound = 0.0;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) row += std::abs(it.value());
    bound = std::max(bound, row);
  }
  return bound;
}

}  // namespace

OperatorPair::OperatorPair(SparseMatrix s, SparseMatrix t, SparseMatrix embed, Eigen::VectorXd gram_h,
                           Eigen::VectorXd gram_y, Eigen::VectorXd gram_z)
    : s_(std::move(s)), t_(std::move(t)), embed_(std::move(embed)) {
  const Eigen::Index n = s_.cols();
  if (n <= 0) throw ShapeError("operator pair: H must be non-trivial");
  if (t_.cols() != n) throw ShapeError("operator pair: S and T must share the domain H");
  if (embed_.size() == 0) {
    embed_ = SparseMatrix(n, n);
    embed_.setIdentity();
  }
  if (embed_.rows() != n || embed_.cols() != n) throw ShapeError("operator pair: embed weight must be dim_H x dim_H");
  gram_h_ = ones_if_empty(std::move(gram_h), n, "H");
  gram_y_ = ones_if_empty(std::move(gram_y), s_.rows(), "Y");
  gram_z_ = ones_if_empty(std::move(gram_z), t_.rows(), "Z");
  s_.makeCompressed();
  t_.makeCompressed();
  embed_.makeCompressed();

  const SparseMatrix asym = SparseMatrix(embed_.transpose()) - embed_;
  if (max_abs(asym) > 1e-12 * std::max(1.0, max_abs(embed_)))
    throw InvalidArgument("operator pair: embed weight must be symmetric");
  // diagonal weights are checked cheaply; others through a Cholesky factorization
  bool diagonal = true;
  for (Eigen::Index r = 0; r < embed_.outerSize() && diagonal; ++r)
    for (SparseMatrix::InnerIterator it(embed_, r); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) diagonal = false;
  if (diagonal) {
    if (!(Eigen::VectorXd(embed_.diagonal()).array() > 0.0).all())
      throw InvalidArgument("operator pair: embed weight must be positive-definite");
  } else if (n <= 5000) {
    Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(embed_)};
    if (llt.info() != Eigen::Success) throw InvalidArgument("operator pair: embed weight must be positive-definite");
  }
}

OperatorPair OperatorPair::with_kernels(Eigen::MatrixXd y_kernel, Eigen::MatrixXd z_kernel) const {
  if (y_kernel.size() && y_kernel.rows() != dim_y()) throw ShapeError("Y kernel has the wrong length");
  if (z_kernel.size() && z_kernel.rows() != dim_z()) throw ShapeError("Z kernel has the wrong length");
  OperatorPair out = *this;
  out.y_kernel_ = y_kernel.size() ? std::move(y_kernel) : Eigen::MatrixXd(dim_y(), 0);
  out.z_kernel_ = z_kernel.size() ? std::move(z_kernel) : Eigen::MatrixXd(dim_z(), 0);
  return out;
}

SparseMatrix OperatorPair::s_adjoint() const {
  return scaled(SparseMatrix(s_.transpose()), gram_h_.cwiseInverse(), gram_y_);
}

SparseMatrix OperatorPair::t_adjoint() const {
  return scaled(SparseMatrix(t_.transpose()), gram_h_.cwiseInverse(), gram_z_);
}

double OperatorPair::norm_h(const Eigen::VectorXd& h) const { return weighted_norm(h, gram_h_); }
double OperatorPair::norm_y(const Eigen::VectorXd& y) const { return weighted_norm(y, gram_y_); }
double OperatorPair::norm_z(const Eigen::VectorXd& z) const { return weighted_norm(z, gram_z_); }
double OperatorPair::inner_h(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return (a.array() * b.array() * gram_h_.array()).sum();
}

OperatorPair make_grid_pair(const PeriodicGrid& grid, int degree) {
  if (degree < 1 || degree >= grid.dim()) throw DegreeError("grid pair needs 1 <= degree < dim");
  const SparseMatrix lap = laplacian_matrix(grid, degree);
  const Eigen::VectorXd e = (1.0 + Eigen::VectorXd(lap.diagonal()).array()).rsqrt();
  SparseMatrix embed(lap.rows(), lap.cols());
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < e.size(); ++i) t.emplace_back(i, i, e[i]);
  embed.setFromTriplets(t.begin(), t.end());
  OperatorPair p(codifferential_matrix(grid, degree), exterior_derivative_matrix(grid, degree), embed,
                 hodge_weights(grid, degree), hodge_weights(grid, degree - 1), hodge_weights(grid, degree + 1));
  return p.with_kernels(harmonic_basis(grid, degree - 1), harmonic_basis(grid, degree + 1));
}

double check_orthogonality(const OperatorPair& p) {
  const SparseMatrix st = p.s() * p.t_adjoint();
  const SparseMatrix ts = p.t() * p.s_adjoint();
  return std::max(max_abs(st), max_abs(ts));
}

SparseMatrix generalized_laplacian(const OperatorPair& p) {
  const SparseMatrix ss = p.s() * p.s_adjoint();
  const SparseMatrix tt = p.t() * p.t_adjoint();
  const Eigen::Index ny = p.dim_y();
  const Eigen::Index n = ny + p.dim_z();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(ss.nonZeros() + tt.nonZeros()));
  for (Eigen::Index r = 0; r < ss.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(ss, r); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index r = 0; r < tt.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(tt, r); it; ++it) trip.emplace_back(ny + it.row(), ny + it.col(), it.value());
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

namespace {

// [G_Y^{1/2} S; G_Z^{1/2} T] G_H^{-1/2}, optionally with G_H^{1/2} E G_H^{-1/2} appended.
Eigen::MatrixXd stacked_dense(const OperatorPair& p, bool with_embed) {
  const Eigen::VectorXd ih = p.gram_h().cwiseSqrt().cwiseInverse();
  const Eigen::Index rows = p.dim_y() + p.dim_z() + (with_embed ? p.dim_h() : 0);
  Eigen::MatrixXd k(rows, p.dim_h());
  k.topRows(p.dim_y()) = Eigen::MatrixXd(scaled(p.s(), p.gram_y().cwiseSqrt(), ih));
  k.middleRows(p.dim_y(), p.dim_z()) = Eigen::MatrixXd(scaled(p.t(), p.gram_z().cwiseSqrt(), ih));
  if (with_embed) k.bottomRows(p.dim_h()) = Eigen::MatrixXd(scaled(p.embed(), p.gram_h().cwiseSqrt(), ih));
  return k;
}

void finish_kernel(const OperatorPair& p, KernelBasis& kb, double above) {
  const Eigen::VectorXd ih = p.gram_h().cwiseSqrt().cwiseInverse();
  kb.vectors = ih.asDiagonal() * kb.vectors;
  double below = 0.0;
  for (Eigen::Index i = 0; i < kb.singular_values.size(); ++i)
    if (kb.singular_values[i] < kb.threshold) below = std::max(below, kb.singular_values[i]);
  if ((above > 0.0 && above < 10.0 * kb.threshold) || below > kb.threshold / 10.0) {
    kb.ambiguous = true;
    char buf[160];
    std::snprintf(buf, sizeof buf, "rank decision ambiguous: largest kept %.3g, smallest rejected %.3g, threshold %.3g",
                  below, above, kb.threshold);
    kb.warning = buf;
  }
  for (Eigen::Index j = 0; j < kb.vectors.cols(); ++j) {
    const Eigen::VectorXd v = kb.vectors.col(j);
    kb.range_orthogonality = std::max(kb.range_orthogonality,
                                      p.norm_y(p.s() * v) + p.norm_z(p.t() * v));
  }
}

KernelBasis kernel_dense(const OperatorPair& p, double tol) {
  const Eigen::MatrixXd k = stacked_dense(p, false);
  const Eigen::Index n = p.dim_h();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(k, Eigen::ComputeFullV);
  // pad with the implicit zeros of a wide matrix
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(n);
  sigma.head(svd.singularValues().size()) = svd.singularValues();
  KernelBasis kb;
  kb.mode_used = KernelMode::dense;
  kb.threshold = tol * (sigma.size() ? sigma.maxCoeff() : 0.0);
  if (kb.threshold == 0.0) kb.threshold = tol;  // S = T = 0: everything is kernel
  std::vector<Eigen::Index> kernel;
  double above = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sigma[i] < kb.threshold)
      kernel.push_back(i);
    else if (above == 0.0 || sigma[i] < above)
      above = sigma[i];
  }
  kb.vectors.resize(n, static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t j = 0; j < kernel.size(); ++j) kb.vectors.col(static_cast<Eigen::Index>(j)) = svd.matrixV().col(kernel[j]);
  kb.singular_values = sigma.reverse();
  finish_kernel(p, kb, above);
  return kb;
}

KernelBasis kernel_iterative(const OperatorPair& p, double tol, std::uint64_t seed) {
  const Eigen::Index n = p.dim_h();
  const Eigen::VectorXd ih = p.gram_h().cwiseSqrt().cwiseInverse();
  const SparseMatrix ks = scaled(p.s(), p.gram_y().cwiseSqrt(), ih);
  const SparseMatrix kt = scaled(p.t(), p.gram_z().cwiseSqrt(), ih);
  const SparseMatrix kst = ks.transpose();
  const SparseMatrix ktt = kt.transpose();
  const LinearMap normal = [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(kst * (ks * x) + ktt * (kt * x));
  };
  const double lambda_max = power_iteration(normal, n, 200, seed);
  const double sigma_max = std::sqrt(std::max(lambda_max, 0.0));

  KernelBasis kb;
  kb.mode_used = KernelMode::iterative;
  kb.threshold = tol * sigma_max;
  if (kb.threshold == 0.0) throw SolverError("iterative kernel needs a nonzero operator", 0, 0.0);
  const double abs_tol = 1e-11 * lambda_max;

  for (int block = static_cast<int>(std::min<Eigen::Index>(8, n));; block = static_cast<int>(std::min<Eigen::Index>(2 * block, n))) {
    const EigenResult er = lobpcg_smallest(normal, n, block, std::max(1, block / 2), abs_tol, 5000, seed);
    if (!er.converged) throw SolverError("LOBPCG did not converge while computing the kernel", er.iterations, 0.0);
    Eigen::VectorXd sigma(er.vectors.cols());
    for (Eigen::Index j = 0; j < sigma.size(); ++j) {
      const Eigen::VectorXd x = er.vectors.col(j);
      sigma[j] = std::sqrt((ks * x).squaredNorm() + (kt * x).squaredNorm());
    }
    const Eigen::Index count = (sigma.array() < kb.threshold).count();
    if (count < block / 2 || block == n) {
      std::vector<Eigen::Index> idx;
      double above = 0.0;
      for (Eigen::Index j = 0; j < sigma.size(); ++j) {
        if (sigma[j] < kb.threshold)
          idx.push_back(j);
        else if (above == 0.0 || sigma[j] < above)
          above = sigma[j];
      }
      kb.vectors.resize(n, static_cast<Eigen::Index>(idx.size()));
      for (std::size_t j = 0; j < idx.size(); ++j) kb.vectors.col(static_cast<Eigen::Index>(j)) = er.vectors.col(idx[j]);
      std::sort(sigma.data(), sigma.data() + sigma.size());
      kb.singular_values = sigma;
      finish_kernel(p, kb, above);
      return kb;
    }
  }
}

}  // namespace

KernelBasis kernel_basis(const OperatorPair& p, const KernelOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("kernel_basis: tolerance must be positive");
  KernelMode mode = options.mode;
  if (mode == KernelMode::automatic) mode = p.dim_h() <= options.dense_limit ? KernelMode::dense : KernelMode::iterative;
  if (mode == KernelMode::dense) {
    if (p.dim_h() > 5000) throw InvalidArgument("kernel_basis: dense mode limited to dim_H <= 5000");
    return kernel_dense(p, options.tol);
  }
  return kernel_iterative(p, options.tol, options.seed);
}

DecompositionResult decompose_element(const OperatorPair& p, const Eigen::VectorXd& u, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("decompose_element: tolerance must be positive");
  if (u.size() != p.dim_h()) throw ShapeError("decompose_element: u is not in H");
  const SparseMatrix s_adj = p.s_adjoint();
  const SparseMatrix t_adj = p.t_adjoint();
  const SparseMatrix ss = p.s() * s_adj;
  const SparseMatrix tt = p.t() * t_adj;

  DecompositionResult out;
  auto solve = [&](const SparseMatrix& a, const Eigen::VectorXd& rhs, const Eigen::VectorXd& gram,
                   const Eigen::MatrixXd& kernel) -> Eigen::VectorXd {
    if (rhs.size() == 0) return rhs;
    CgOptions opt;
    // ||S k|| is the residual of this solve; scale so that it lands below tol ||u||
    opt.tol = std::max(tol / std::max(1.0, std::sqrt(gershgorin(a))), 1e-15);
    const Eigen::MatrixXd z = kernel.size() ? kernel : Eigen::MatrixXd(rhs.size(), 0);
    const CgResult r = deflated_cg([&](const Eigen::VectorXd& x) { return Eigen::VectorXd(a * x); }, rhs, gram, z, opt);
    out.iterations += r.iterations;
    return r.x;
  };
  out.a = solve(ss, p.s() * u, p.gram_y(), p.y_kernel());
  out.b = solve(tt, p.t() * u, p.gram_z(), p.z_kernel());
  const Eigen::VectorXd sa = s_adj * out.a;
  const Eigen::VectorXd tb = t_adj * out.b;
  out.kernel_part = u - sa - tb;

  const double un = p.norm_h(u);
  if (un > 0.0) {
    out.residual = p.norm_h(u - out.kernel_part - sa - tb) / un;
    out.kernel_defect = (p.norm_y(p.s() * out.kernel_part) + p.norm_z(p.t() * out.kernel_part)) / un;
    out.orthogonality = std::max({std::abs(p.inner_h(out.kernel_part, sa)), std::abs(p.inner_h(out.kernel_part, tb)),
                                  std::abs(p.inner_h(sa, tb))}) /
                        (un * un);
  }
  return out;
}

double coercivity_constant(const OperatorPair& p) {
  if (p.dim_h() > 5000) throw InvalidArgument("coercivity_constant: dense mode limited to dim_H <= 5000");
  const Eigen::MatrixXd k = stacked_dense(p, true);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(k);
  const double smin = svd.singularValues().minCoeff();
  if (!(smin > 1e-14 * svd.singularValues().maxCoeff())) throw InvalidArgument("coercivity_constant: embed weight is singular");
  return 1.0 / smin;
}

double coercivity_probe_ratio(const OperatorPair& p, double c, int probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  Eigen::VectorXd h(p.dim_h());
  for (int k = 0; k < probes; ++k) {
    for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = normal(rng);
    const double rhs = p.norm_y(p.s() * h) + p.norm_z(p.t() * h) + p.norm_h(p.embed() * h);
    worst = std::max(worst, p.norm_h(h) / (c * rhs));
  }
  return worst;
}

PairingReport compensated_pairing_test(const OperatorPair& p, const std::vector<Eigen::VectorXd>& u_seq,
                                       const std::vector<Eigen::VectorXd>& v_seq, const Eigen::VectorXd& u_bar,
                                       const Eigen::VectorXd& v_bar, const std::vector<double>& schedule) {
  if (u_seq.size() != v_seq.size() || u_seq.size() != schedule.size())
    throw ShapeError("compensated_pairing_test: sequences and schedule must have equal length");
  if (u_seq.size() < 3) throw InvalidArgument("compensated_pairing_test: need at least three entries");
  const Eigen::Index n = p.dim_h();
  if (u_bar.size() != n || v_bar.size() != n) throw ShapeError("compensated_pairing_test: limits are not in H");

  PairingReport report;
  report.schedule = schedule;
  report.limit_pairing = p.inner_h(u_bar, v_bar);
  const Eigen::VectorXd su_bar = p.s() * u_bar;
  const Eigen::VectorXd tv_bar = p.t() * v_bar;
  std::vector<double> gaps;
  double scale = std::abs(report.limit_pairing);
  for (std::size_t k = 0; k < u_seq.size(); ++k) {
    if (u_seq[k].size() != n || v_seq[k].size() != n) throw ShapeError("compensated_pairing_test: entry not in H");
    PairingRow row;
    row.index = static_cast<int>(k);
    row.inner_uv = p.inner_h(u_seq[k], v_seq[k]);
    row.gap = std::abs(row.inner_uv - report.limit_pairing);
    row.norm_su_minus_subar = p.norm_y(p.s() * u_seq[k] - su_bar);
    row.norm_tv_minus_tvbar = p.norm_z(p.t() * v_seq[k] - tv_bar);
    row.norm_embed_u_minus_ubar = p.norm_h(p.embed() * (u_seq[k] - u_bar));
    scale = std::max(scale, std::abs(row.inner_uv));
    gaps.push_back(row.gap);
    report.rows.push_back(row);
  }
  report.order = fit_order(schedule, gaps, 1e-12 * std::max(scale, 1e-300));
  return report;
}

void write_pairing_csv(std::ostream& out, const PairingReport& report) {
  out << "index,inner_uv,gap,norm_Su_minus_Subar,norm_Tv_minus_Tvbar,norm_embed_u_minus_ubar\n";
  char buf[512];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.index, r.inner_uv, r.gap,
                  r.norm_su_minus_subar, r.norm_tv_minus_tvbar, r.norm_embed_u_minus_ubar);
    out << buf;
  }
}

}  // namespace divcurl
