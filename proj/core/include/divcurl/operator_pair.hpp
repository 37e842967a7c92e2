#pragma once

// Finite-dimensional operator pairs S: H -> Y, T: H -> Z with diagonal Gram matrices on
// H, Y, Z and a positive-definite weight E defining the weaker norm ||h||~ = ||E h||_H.
// Adjoints are inner-product transposes: S† = G_H^{-1} S^T G_Y.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "divcurl/fitting.hpp"
#include "divcurl/grid.hpp"
#include "divcurl/grid_matrices.hpp"

namespace divcurl {

class OperatorPair {
 public:
  /// Empty Gram vectors mean identity; an empty embed means the identity on H.
  OperatorPair(SparseMatrix s, SparseMatrix t, SparseMatrix embed = {}, Eigen::VectorXd gram_h = {},
               Eigen::VectorXd gram_y = {}, Eigen::VectorXd gram_z = {});

  Eigen::Index dim_h() const noexcept { return s_.cols(); }
  Eigen::Index dim_y() const noexcept { return s_.rows(); }
  Eigen::Index dim_z() const noexcept { return t_.rows(); }

  const SparseMatrix& s() const noexcept { return s_; }
  const SparseMatrix& t() const noexcept { return t_; }
  const SparseMatrix& embed() const noexcept { return embed_; }
  const Eigen::VectorXd& gram_h() const noexcept { return gram_h_; }
  const Eigen::VectorXd& gram_y() const noexcept { return gram_y_; }
  const Eigen::VectorXd& gram_z() const noexcept { return gram_z_; }

  SparseMatrix s_adjoint() const;
  SparseMatrix t_adjoint() const;

  double norm_h(const Eigen::VectorXd& h) const;
  double norm_y(const Eigen::VectorXd& y) const;
  double norm_z(const Eigen::VectorXd& z) const;
  double inner_h(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  /// Known kernels of SS† on Y and TT† on Z (Gram-orthonormal columns), used to deflate
  /// the solves in decompose_element. Empty when nothing is known a priori.
  const Eigen::MatrixXd& y_kernel() const noexcept { return y_kernel_; }
  const Eigen::MatrixXd& z_kernel() const noexcept { return z_kernel_; }
  OperatorPair with_kernels(Eigen::MatrixXd y_kernel, Eigen::MatrixXd z_kernel) const;

 private:
  SparseMatrix s_, t_, embed_;
  Eigen::VectorXd gram_h_, gram_y_, gram_z_;
  Eigen::MatrixXd y_kernel_, z_kernel_;
};

/// S = δ on q-cochains, T = d on q-cochains, Grams = Hodge weights, E = diag(1 + diag Δ_q)^{-1/2}.
/// With these Grams S† = d_{q-1} and T† = δ_{q+1}; on 1-cochains of T^2, SS† = Δ_0 and TT† = Δ_2.
OperatorPair make_grid_pair(const PeriodicGrid& grid, int degree = 1);

/// max(|S T†|_max, |T S†|_max); zero certifies S∘T† = 0 and T∘S† = 0.
double check_orthogonality(const OperatorPair& p);

/// diag(S S†, T T†) on Y ⊕ Z.
SparseMatrix generalized_laplacian(const OperatorPair& p);

enum class KernelMode { automatic, dense, iterative };

struct KernelOptions {
  double tol = 1e-8;  // relative to the largest singular value
  KernelMode mode = KernelMode::automatic;
  Eigen::Index dense_limit = 2000;  // automatic picks dense up to this dim_H
  std::uint64_t seed = 1;
};

struct KernelBasis {
  Eigen::MatrixXd vectors;           // H-orthonormal columns
  Eigen::VectorXd singular_values;   // ascending; the computed part of the spectrum only
  double threshold = 0.0;            // absolute
  double range_orthogonality = 0.0;  // max over basis vectors of (||S k||_Y + ||T k||_Z)
  bool ambiguous = false;            // singular-value gap around the threshold below 10x
  std::string warning;
  KernelMode mode_used = KernelMode::dense;

  Eigen::Index size() const noexcept { return vectors.cols(); }
};

/// Basis of {h : (S, T) h ≈ 0}, from the singular values of the stacked map
/// [G_Y^{1/2} S; G_Z^{1/2} T] G_H^{-1/2}: dense SVD or LOBPCG on its normal operator.
KernelBasis kernel_basis(const OperatorPair& p, const KernelOptions& options = {});

struct DecompositionResult {
  Eigen::VectorXd kernel_part;
  Eigen::VectorXd a;  // in Y
  Eigen::VectorXd b;  // in Z
  double residual = 0.0;        // ||u - k - S†a - T†b||_H / ||u||
  double kernel_defect = 0.0;   // (||S k||_Y + ||T k||_Z) / ||u||
  double orthogonality = 0.0;   // max pairwise |<., .>_H| / ||u||^2
  int iterations = 0;
};

/// u = k + S†a + T†b with SS†a = Su and TT†b = Tu solved by deflated conjugate gradients.
DecompositionResult decompose_element(const OperatorPair& p, const Eigen::VectorXd& u, double tol = 1e-8);

/// Smallest C with ||h||_H <= C (||Sh||_Y^2 + ||Th||_Z^2 + ||Eh||_H^2)^{1/2} for all h, i.e.
/// 1/σ_min of the stacked map. Since the sum of the three norms dominates the root of the
/// sum of squares, C also bounds ||h||_H by C(||Sh|| + ||Th|| + ||Eh||). Dense; dim_H <= 5000.
double coercivity_constant(const OperatorPair& p);

/// max over random probes of ||h||_H / (C (||Sh|| + ||Th|| + ||Eh||)); <= 1 certifies C.
double coercivity_probe_ratio(const OperatorPair& p, double c, int probes, std::uint64_t seed);

struct PairingRow {
  int index = 0;
  double inner_uv = 0.0;
  double gap = 0.0;
  double norm_su_minus_subar = 0.0;
  double norm_tv_minus_tvbar = 0.0;
  double norm_embed_u_minus_ubar = 0.0;
};

struct PairingReport {
  std::vector<PairingRow> rows;
  std::vector<double> schedule;
  double limit_pairing = 0.0;  // <u_bar, v_bar>_H
  OrderFit order;              // gap against the schedule
};

/// Rows of pairings and norm-Cauchy diagnostics for u^k, v^k against the supplied limits.
/// `schedule` holds the parameter each sequence entry belongs to (e.g. ε_k), used for the
/// order fit; it must be positive and as long as the sequences.
PairingReport compensated_pairing_test(const OperatorPair& p, const std::vector<Eigen::VectorXd>& u_seq,
                                       const std::vector<Eigen::VectorXd>& v_seq, const Eigen::VectorXd& u_bar,
                                       const Eigen::VectorXd& v_bar, const std::vector<double>& schedule);

/// CSV with header index,inner_uv,gap,norm_Su_minus_Subar,norm_Tv_minus_Tvbar,norm_embed_u_minus_ubar
void write_pairing_csv(std::ostream& out, const PairingReport& report);

}  // namespace divcurl
