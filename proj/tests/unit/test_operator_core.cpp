#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include <Eigen/Dense>

#include "divcurl/error.hpp"
#include "divcurl/operator_pair.hpp"
#include "test_support.hpp"

using namespace divcurl;
using divcurl::testing::random_vector;
constexpr double pi = std::numbers::pi;

namespace {

SparseMatrix identity(Eigen::Index n) {
  SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

SparseMatrix sparse(const Eigen::MatrixXd& d) { return d.sparseView(); }

}  // namespace

TEST_CASE("operator pair validation") {
  CHECK_THROWS_AS(OperatorPair(identity(3), identity(4)), ShapeError);
  CHECK_THROWS_AS(OperatorPair(identity(3), identity(3), sparse(-Eigen::MatrixXd::Identity(3, 3))), InvalidArgument);
  Eigen::MatrixXd nonsym = Eigen::MatrixXd::Identity(3, 3);
  nonsym(0, 1) = 0.5;
  CHECK_THROWS_AS(OperatorPair(identity(3), identity(3), sparse(nonsym)), InvalidArgument);
  CHECK_THROWS_AS(OperatorPair(identity(3), identity(3), {}, Eigen::VectorXd::Zero(3)), InvalidArgument);
}

TEST_CASE("check_orthogonality") {
  const OperatorPair grid_pair = make_grid_pair(PeriodicGrid::cube(2, 8));
  CHECK(check_orthogonality(grid_pair) == 0.0);
  CHECK(check_orthogonality(make_grid_pair(PeriodicGrid({8, 6}, {1.0, 0.7}))) <= 1e-12);
  CHECK(check_orthogonality(OperatorPair(identity(4), identity(4))) == 1.0);

  // T from an orthonormal basis of ker S (dense SVD oracle)
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(40, 120);
  const Eigen::VectorXd r = random_vector(40 * 120, 5);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (std::abs(r[i]) < 0.1) s(i % 40, i / 40) = r[i] * 10.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeFullV);
  const Eigen::Index rank = (svd.singularValues().array() > 1e-10).count();
  const Eigen::MatrixXd null = svd.matrixV().rightCols(120 - rank);
  const OperatorPair p(sparse(s), sparse(null.transpose()));
  CHECK(check_orthogonality(p) <= 1e-12);
}

TEST_CASE("cross terms vanish when the pair is orthogonal") {
  const OperatorPair p = make_grid_pair(PeriodicGrid::cube(2, 8));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::VectorXd sa = p.s_adjoint() * random_vector(p.dim_y(), seed);
    const Eigen::VectorXd tb = p.t_adjoint() * random_vector(p.dim_z(), seed + 100);
    CHECK(std::abs(p.inner_h(sa, tb)) <= 1e-12 * p.norm_h(sa) * p.norm_h(tb));
  }
}

TEST_CASE("generalized Laplacian") {
  const PeriodicGrid g = PeriodicGrid::cube(2, 8);
  const SparseMatrix gl = generalized_laplacian(make_grid_pair(g));
  const Eigen::MatrixXd dense(gl);
  const auto n0 = static_cast<Eigen::Index>(g.cell_count(0));
  const auto n2 = static_cast<Eigen::Index>(g.cell_count(2));
  const Eigen::MatrixXd lap0(laplacian_matrix(g, 0));
  const Eigen::MatrixXd lap2(laplacian_matrix(g, 2));
  CHECK((dense.topLeftCorner(n0, n0) - lap0).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((dense.bottomRightCorner(n2, n2) - lap2).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(dense.topRightCorner(n0, n2).cwiseAbs().maxCoeff() == 0.0);

  // symmetric PSD in the Y ⊕ Z Gram
  const OperatorPair p = make_grid_pair(PeriodicGrid({8, 6}, {1.0, 0.7}));
  Eigen::VectorXd gram(p.dim_y() + p.dim_z());
  gram << p.gram_y(), p.gram_z();
  const Eigen::MatrixXd sym = gram.cwiseSqrt().asDiagonal() * Eigen::MatrixXd(generalized_laplacian(p)) *
                              gram.cwiseSqrt().cwiseInverse().asDiagonal();
  CHECK((sym - sym.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * sym.cwiseAbs().maxCoeff());
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff() >= -1e-10);

  CHECK(Eigen::MatrixXd(generalized_laplacian(OperatorPair(SparseMatrix(3, 5), SparseMatrix(2, 5)))).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXd two(1, 1);
  two << 2.0;
  const SparseMatrix scalar = generalized_laplacian(OperatorPair(sparse(two), SparseMatrix(0, 1)));
  CHECK(scalar.rows() == 1);
  CHECK(Eigen::MatrixXd(scalar)(0, 0) == 4.0);
}

TEST_CASE("kernel basis is the first Betti number") {
  CHECK(kernel_basis(make_grid_pair(PeriodicGrid::cube(2, 8))).size() == 2);
  CHECK(kernel_basis(make_grid_pair(PeriodicGrid::cube(3, 4))).size() == 3);
  for (int n : {4, 8, 16}) {
    const KernelBasis kb = kernel_basis(make_grid_pair(PeriodicGrid::cube(2, n)));
    CHECK(kb.size() == 2);
    CHECK_FALSE(kb.ambiguous);
  }
  const OperatorPair p = make_grid_pair(PeriodicGrid::cube(2, 8));
  const KernelBasis kb = kernel_basis(p);
  // H-orthonormal and spanning the parallel forms
  const Eigen::MatrixXd gram = kb.vectors.transpose() * p.gram_h().asDiagonal() * kb.vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
  const Eigen::MatrixXd harm = harmonic_basis(PeriodicGrid::cube(2, 8), 1);
  const Eigen::MatrixXd overlap = harm.transpose() * p.gram_h().asDiagonal() * kb.vectors;
  CHECK(std::abs(std::abs(overlap.determinant()) - 1.0) <= 1e-10);
  CHECK(kb.range_orthogonality <= 1e-8);

  Eigen::MatrixXd inv(3, 3);
  inv << 2, 1, 0, 0, 3, 1, 1, 0, 4;
  CHECK(kernel_basis(OperatorPair(sparse(inv), SparseMatrix(0, 3))).size() == 0);
}

TEST_CASE("iterative kernel agrees with the dense one") {
  for (auto [dim, n] : {std::pair{2, 16}, std::pair{3, 8}}) {
    const OperatorPair p = make_grid_pair(PeriodicGrid::cube(dim, n));
    KernelOptions dense, iter;
    dense.mode = KernelMode::dense;
    iter.mode = KernelMode::iterative;
    const KernelBasis a = kernel_basis(p, dense);
    const KernelBasis b = kernel_basis(p, iter);
    CHECK(a.size() == dim);
    CHECK(b.size() == dim);
    CHECK(b.mode_used == KernelMode::iterative);
    CHECK_FALSE(b.ambiguous);
    // same subspace: projector difference
    const Eigen::MatrixXd pa = a.vectors * a.vectors.transpose() * p.gram_h().asDiagonal();
    const Eigen::MatrixXd pb = b.vectors * b.vectors.transpose() * p.gram_h().asDiagonal();
    CHECK((pa - pb).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("decompose_element") {
  const PeriodicGrid g = PeriodicGrid::cube(2, 8);
  const OperatorPair p = make_grid_pair(g);
  SUBCASE("kernel element") {
    const Eigen::VectorXd u = harmonic_basis(g, 1).col(0) * 2.0 + harmonic_basis(g, 1).col(1);
    const DecompositionResult r = decompose_element(p, u, 1e-10);
    CHECK(r.a.norm() <= 1e-12);
    CHECK(r.b.norm() <= 1e-12);
    CHECK(p.norm_h(r.kernel_part - u) <= 1e-12);
  }
  SUBCASE("pure range element") {
    const Eigen::VectorXd y = random_vector(p.dim_y(), 3);
    const Eigen::VectorXd u = p.s_adjoint() * y;
    const DecompositionResult r = decompose_element(p, u, 1e-10);
    CHECK(p.norm_h(r.kernel_part) <= 1e-9 * p.norm_h(u));
    CHECK(p.norm_z(r.b) <= 1e-12);
    CHECK(p.norm_h(p.s_adjoint() * r.a - u) <= 1e-9 * p.norm_h(u));
  }
  SUBCASE("random element: orthogonal parts") {
    const Eigen::VectorXd u = random_vector(p.dim_h(), 4);
    const DecompositionResult r = decompose_element(p, u, 1e-8);
    CHECK(r.orthogonality <= 1e-6);
    CHECK(r.residual <= 1e-8);
    CHECK(r.kernel_defect <= 1e-8);
    // independent inner-product check
    const Eigen::VectorXd sa = p.s_adjoint() * r.a;
    const Eigen::VectorXd tb = p.t_adjoint() * r.b;
    const double u2 = p.inner_h(u, u);
    CHECK(std::abs(p.inner_h(sa, tb)) <= 1e-6 * u2);
    CHECK(std::abs(p.inner_h(r.kernel_part, sa)) <= 1e-6 * u2);
    CHECK(std::abs(p.inner_h(r.kernel_part, tb)) <= 1e-6 * u2);
  }
  CHECK_THROWS_AS(decompose_element(p, Eigen::VectorXd::Zero(3), 1e-8), ShapeError);
}

TEST_CASE("coercivity constant") {
  const SparseMatrix zero(4, 4);
  CHECK(coercivity_constant(OperatorPair(zero, zero)) == doctest::Approx(1.0).epsilon(1e-14));
  SparseMatrix two = identity(4) * 2.0;
  CHECK(coercivity_constant(OperatorPair(zero, zero, two)) == doctest::Approx(0.5).epsilon(1e-14));

  const OperatorPair p = make_grid_pair(PeriodicGrid::cube(2, 8));
  const double c = coercivity_constant(p);
  CHECK(std::isfinite(c));
  CHECK(c >= 1.0);
  CHECK(coercivity_probe_ratio(p, c, 10000, 77) <= 1.0 + 1e-8);

  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
  singular(0, 0) = 1.0;
  singular(1, 1) = 1e-300;
  CHECK_THROWS_AS(coercivity_constant(OperatorPair(SparseMatrix(1, 2), SparseMatrix(1, 2), sparse(singular))),
                  InvalidArgument);
}

TEST_CASE("compensated pairing test") {
  const PeriodicGrid g = PeriodicGrid::cube(2, 256);
  const OperatorPair p = make_grid_pair(g);
  const std::vector<double> eps{1.0 / 4, 1.0 / 8, 1.0 / 16};

  SUBCASE("constant sequences") {
    const Eigen::VectorXd u = random_vector(p.dim_h(), 1);
    const PairingReport r = compensated_pairing_test(p, {u, u, u}, {u, u, u}, u, u, eps);
    for (const auto& row : r.rows) CHECK(row.gap == 0.0);
    CHECK(r.order.exact);
  }
  SUBCASE("oscillation in both factors: hypothesis fails, gap -> mean(s^2)") {
    std::vector<Eigen::VectorXd> seq;
    for (double e : eps) {
      const double k = 2 * pi / e;
      seq.push_back(integrate_form(g, 1, [k](AxisMask s, const Point& x) { return s == 0b01 ? std::sin(k * x[0]) : 0.0; }).values());
    }
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.dim_h());
    const PairingReport r = compensated_pairing_test(p, seq, seq, zero, zero, eps);
    CHECK(std::abs(r.rows.back().gap - 0.5) <= 0.01);
    // δ of the factor grows instead of settling
    CHECK(r.rows.back().norm_su_minus_subar >= r.rows.front().norm_su_minus_subar);
  }
  SUBCASE("separated variables: hypotheses hold exactly, gap -> 0") {
    // u = w(x2/eps) dx1 has Su = δu = 0, v = u(x1/eps) dx1 has Tv = dv = 0.
    std::vector<Eigen::VectorXd> us, vs;
    for (double e : eps) {
      const double k = 2 * pi / e;
      us.push_back(integrate_form(g, 1, [k](AxisMask s, const Point& x) {
        return s == 0b01 ? 1.0 + std::sin(k * x[1]) : 0.0; }).values());
      vs.push_back(integrate_form(g, 1, [k](AxisMask s, const Point& x) {
        return s == 0b01 ? 1.0 + std::cos(k * x[0]) : 0.0; }).values());
    }
    const Eigen::VectorXd bar = parallel_form(g, 0b01).values();
    const PairingReport r = compensated_pairing_test(p, us, vs, bar, bar, eps);
    CHECK(r.limit_pairing == doctest::Approx(1.0));
    for (const auto& row : r.rows) {
      CHECK(row.norm_su_minus_subar <= 1e-10);
      CHECK(row.norm_tv_minus_tvbar <= 1e-10);
      CHECK(row.gap <= 1e-10);
      CHECK(row.norm_embed_u_minus_ubar > 0.0);
    }
    CHECK(order_at_least(r.order, 1.0));
  }
  std::ostringstream csv;
  const Eigen::VectorXd u = Eigen::VectorXd::Ones(p.dim_h());
  write_pairing_csv(csv, compensated_pairing_test(p, {u, u, u}, {u, u, u}, u, u, eps));
  CHECK(csv.str().rfind("index,inner_uv,gap,norm_Su_minus_Subar,norm_Tv_minus_Tvbar,norm_embed_u_minus_ubar\n", 0) == 0);
  CHECK_THROWS_AS(compensated_pairing_test(p, {u, u}, {u, u}, u, u, {1.0, 0.5}), InvalidArgument);
}
