#include "divcurl/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "divcurl/error.hpp"

namespace divcurl {

namespace {

constexpr double kRankFloor = 1e-6;
constexpr double kAcceptProjection = 0.3;
constexpr double kFrameContinuity = 0.9;

Eigen::Index col(std::size_t node) { return static_cast<Eigen::Index>(node); }

// Jacobian columns ∂_i f, one (n+k) x nodes block per axis.
std::vector<Eigen::MatrixXd> jacobian(const ImmersionField& f) {
  std::vector<Eigen::MatrixXd> d;
  for (int i = 0; i < f.chart().dim(); ++i)
    d.push_back(differentiate(f.chart(), f.points(), i, kGeometryStencilOrder));
  return d;
}

Eigen::MatrixXd jacobian_at(const std::vector<Eigen::MatrixXd>& d, std::size_t node) {
  Eigen::MatrixXd j(d[0].rows(), static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) j.col(static_cast<Eigen::Index>(i)) = d[i].col(col(node));
  return j;
}

// Parent in the row-major comb: step back along the highest axis that is not at zero.
long long comb_parent(const Chart& chart, std::size_t node) {
  const NodeIndex m = chart.multi_index(node);
  for (int a = chart.dim() - 1; a >= 0; --a)
    if (m[a] > 0) return chart.neighbour(node, a, -1);
  return -1;
}

}  // namespace

MetricField induced_metric(const ImmersionField& f) {
  const Chart& chart = f.chart();
  const int n = chart.dim();
  const auto d = jacobian(f);
  Eigen::MatrixXd c(n * n, col(chart.node_count()));
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const Eigen::MatrixXd j = jacobian_at(d, node);
    const Eigen::MatrixXd g = j.transpose() * j;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    if (!(std::sqrt(std::max(0.0, es.eigenvalues()(0))) > kRankFloor))
      throw GeometryError("immersion Jacobian is rank deficient", node);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) c(a * n + b, col(node)) = g(a, b);
  }
  return MetricField(chart, std::move(c));
}

DefectNorms isometry_defect(const ImmersionField& f, const MetricField& g) {
  if (!(f.chart().dim() == g.chart().dim() && f.chart().node_count() == g.chart().node_count()))
    throw ShapeError("immersion and metric live on different charts");
  const MetricField induced = induced_metric(f);
  const Chart& chart = f.chart();
  DefectNorms out;
  double sum = 0.0;
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    if (!chart.interior(node, 1)) continue;
    const auto diff = (induced.components().col(col(node)) - g.components().col(col(node))).eval();
    out.sup = std::max(out.sup, diff.cwiseAbs().maxCoeff());
    sum += diff.squaredNorm();
  }
  out.l2 = std::sqrt(sum * chart.cell_volume());
  return out;
}

Eigen::MatrixXd christoffel_symbols(const MetricField& g) {
  const Chart& chart = g.chart();
  const int n = chart.dim();
  std::vector<Eigen::MatrixXd> dg;
  for (int i = 0; i < n; ++i) dg.push_back(differentiate(chart, g.components(), i, kGeometryStencilOrder));
  Eigen::MatrixXd gamma(n * n * n, col(chart.node_count()));
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const Eigen::MatrixXd ginv = g.at(node).inverse();
    auto dgc = [&](int axis, int a, int b) { return dg[axis](a * n + b, col(node)); };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd lowered(n);
        for (int l = 0; l < n; ++l) lowered(l) = 0.5 * (dgc(i, j, l) + dgc(j, i, l) - dgc(l, i, j));
        const Eigen::VectorXd raised = ginv * lowered;
        for (int k = 0; k < n; ++k) gamma((k * n + i) * n + j, col(node)) = raised(k);
      }
  }
  return gamma;
}

CurvatureField riemann_curvature(const MetricField& g) {
  const Chart& chart = g.chart();
  const int n = chart.dim();
  std::vector<Eigen::MatrixXd> dg;
  for (int i = 0; i < n; ++i) dg.push_back(differentiate(chart, g.components(), i, kGeometryStencilOrder));
  // ddg[i][j] = ∂_i ∂_j g, computed once per unordered pair so it is exactly symmetric.
  std::vector<std::vector<Eigen::MatrixXd>> ddg(static_cast<std::size_t>(n),
                                                std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      ddg[i][j] = differentiate(chart, dg[j], i, kGeometryStencilOrder);
      if (j != i) ddg[j][i] = ddg[i][j];
    }
  const Eigen::MatrixXd gamma = christoffel_symbols(g);

  CurvatureField out{chart, n, Eigen::MatrixXd::Zero(n * n * n * n, col(chart.node_count())), 0.0};
  double max_r = 0.0;
  double max_bianchi = 0.0;
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const Eigen::MatrixXd gm = g.at(node);
    auto second = [&](int a, int b, int p, int q) { return ddg[a][b](p * n + q, col(node)); };
    auto gam = [&](int k, int i, int j) { return gamma((k * n + i) * n + j, col(node)); };
    // Lowered Christoffels Γ_{q,ij} = g_qp Γ^p_ij.
    std::vector<double> low(static_cast<std::size_t>(n * n * n));
    for (int q = 0; q < n; ++q)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int p = 0; p < n; ++p) s += gm(q, p) * gam(p, i, j);
          low[static_cast<std::size_t>((q * n + i) * n + j)] = s;
        }
    auto lg = [&](int q, int i, int j) { return low[static_cast<std::size_t>((q * n + i) * n + j)]; };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double r = 0.5 * (second(j, k, i, l) + second(i, l, j, k) - second(i, k, j, l) - second(j, l, i, k));
            for (int q = 0; q < n; ++q) r += lg(q, j, k) * gam(q, i, l) - lg(q, i, k) * gam(q, j, l);
            // The lowered formula above computes <R(∂i,∂j)∂l, ∂k>; swap to <R(∂i,∂j)∂k, ∂l>.
            out.components(((i * n + j) * n + k) * n + l, col(node)) = -r;
            max_r = std::max(max_r, std::abs(r));
          }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            max_bianchi = std::max(max_bianchi, std::abs(out.at(node, i, j, k, l) + out.at(node, j, k, i, l) +
                                                         out.at(node, k, i, j, l)));
  }
  out.bianchi_residual = max_r > 0.0 ? max_bianchi / max_r : 0.0;
  return out;
}

Eigen::VectorXd sectional_curvature(const CurvatureField& r, const MetricField& g, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= r.n || j >= r.n) throw InvalidArgument("sectional curvature needs two distinct axes");
  Eigen::VectorXd k(col(r.chart.node_count()));
  for (std::size_t node = 0; node < r.chart.node_count(); ++node) {
    const Eigen::MatrixXd gm = g.at(node);
    const double area2 = gm(i, i) * gm(j, j) - gm(i, j) * gm(i, j);
    if (!(area2 > 0.0)) throw GeometryError("degenerate coordinate plane", node);
    k(col(node)) = r.at(node, i, j, j, i) / area2;
  }
  return k;
}

Eigen::MatrixXd FundamentalData::frame_matrix(std::size_t node) const {
  Eigen::MatrixXd e(n, n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a) e(i, a) = frame_coefficients(i * n + a, col(node));
  return e;
}

Eigen::MatrixXd FundamentalData::metric(std::size_t node) const {
  const Eigen::MatrixXd einv = frame_matrix(node).inverse();
  return einv.transpose() * einv;
}

Eigen::MatrixXd FundamentalData::shape_operator(std::size_t node, int alpha) const {
  const Eigen::MatrixXd e = frame_matrix(node);
  Eigen::MatrixXd bm(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) bm(i, j) = b(node, alpha, i, j);
  return e * e.transpose() * bm;
}

double FundamentalData::frame_defect() const {
  const int m = ambient();
  double worst = 0.0;
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    Eigen::MatrixXd frame(m, m);
    for (int a = 0; a < n; ++a) frame.col(a) = tangent.block(a * m, col(node), m, 1);
    for (int al = 0; al < k; ++al) frame.col(n + al) = normal.block(al * m, col(node), m, 1);
    worst = std::max(worst, (frame.transpose() * frame - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff());
  }
  return worst;
}

double FundamentalData::symmetry_defect() const {
  double worst = 0.0;
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    for (int al = 0; al < k; ++al)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(b(node, al, i, j) - b(node, al, j, i)));
    for (int j = 0; j < n; ++j)
      for (int al = 0; al < k; ++al)
        for (int be = 0; be < k; ++be)
          worst = std::max(worst, std::abs(conn(node, j, al, be) + conn(node, j, be, al)));
  }
  return worst;
}

FundamentalData fundamental_data(const ImmersionField& f, const FrameOptions& options) {
  const Chart& chart = f.chart();
  const int n = chart.dim();
  const int k = chart.codim();
  const int m = n + k;
  if (options.orientation != 1 && options.orientation != -1) throw InvalidArgument("orientation must be +1 or -1");
  for (const auto& r : options.normal_references)
    if (r.size() != m || !(r.norm() > 0.0)) throw InvalidArgument("normal reference vectors must be nonzero in R^{n+k}");
  const bool cofactor = options.normal_references.empty() && k == 1;
  std::vector<Eigen::VectorXd> refs = options.normal_references;
  if (refs.empty() && !cofactor)
    for (int c = 0; c < m; ++c) refs.push_back(Eigen::VectorXd::Unit(m, c));

  const std::size_t nodes = chart.node_count();
  FundamentalData fd{chart, n, k, {}, {}, {}, {}, {}};
  fd.tangent.resize(n * m, col(nodes));
  fd.normal.resize(k * m, col(nodes));
  fd.frame_coefficients.resize(n * n, col(nodes));
  fd.second_form.resize(k * n * n, col(nodes));
  fd.normal_conn.resize(n * k * k, col(nodes));

  const auto d = jacobian(f);
  for (std::size_t node = 0; node < nodes; ++node) {
    const Eigen::MatrixXd j = jacobian_at(d, node);
    // Modified Gram-Schmidt, J = Q R with R upper triangular; E = R^{-1}.
    Eigen::MatrixXd q = j;
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < a; ++b) {
        r(b, a) = q.col(b).dot(q.col(a));
        q.col(a) -= r(b, a) * q.col(b);
      }
      r(a, a) = q.col(a).norm();
      if (!(r(a, a) > kRankFloor)) throw GeometryError("immersion Jacobian is rank deficient", node);
      q.col(a) /= r(a, a);
    }
    const Eigen::MatrixXd e = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));
    for (int a = 0; a < n; ++a) fd.tangent.block(a * m, col(node), m, 1) = q.col(a);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) fd.frame_coefficients(i * n + a, col(node)) = e(i, a);

    Eigen::MatrixXd normals(m, k);
    if (cofactor) {
      Eigen::MatrixXd aug(m, m);
      aug.leftCols(n) = j;
      Eigen::VectorXd nu(m);
      for (int c = 0; c < m; ++c) {
        aug.col(n) = Eigen::VectorXd::Unit(m, c);
        nu(c) = aug.determinant();
      }
      normals.col(0) = options.orientation * nu.normalized();
    } else {
      int found = 0;
      for (const auto& ref : refs) {
        if (found == k) break;
        Eigen::VectorXd v = ref.normalized();
        for (int pass = 0; pass < 2; ++pass) {
          for (int a = 0; a < n; ++a) v -= q.col(a).dot(v) * q.col(a);
          for (int b = 0; b < found; ++b) v -= normals.col(b).dot(v) * normals.col(b);
        }
        if (v.norm() < kAcceptProjection) continue;
        normals.col(found++) = v.normalized();
      }
      if (found < k) throw GeometryError("normal reference vectors do not span the normal space", node);
    }

    const long long parent = comb_parent(chart, node);
    if (parent >= 0) {
      for (int a = 0; a < n; ++a)
        if (q.col(a).dot(fd.tangent.block(a * m, parent, m, 1).col(0)) < kFrameContinuity)
          throw GeometryError("tangent frame jumps between neighbouring nodes; refine the resolution", node);
      for (int al = 0; al < k; ++al) {
        double dot = normals.col(al).dot(fd.normal.block(al * m, parent, m, 1).col(0));
        if (!cofactor && dot < 0.0) {
          normals.col(al) *= -1.0;
          dot = -dot;
        }
        if (dot < kFrameContinuity)
          throw GeometryError("normal frame jumps between neighbouring nodes; refine the resolution", node);
      }
    }
    for (int al = 0; al < k; ++al) fd.normal.block(al * m, col(node), m, 1) = normals.col(al);
  }

  // ∂_i ∂_j f, one composed derivative per unordered pair so B is exactly symmetric.
  for (int i = 0; i < n; ++i)
    for (int jj = i; jj < n; ++jj) {
      const Eigen::MatrixXd dd = differentiate(chart, d[static_cast<std::size_t>(jj)], i, kGeometryStencilOrder);
      for (std::size_t node = 0; node < nodes; ++node)
        for (int al = 0; al < k; ++al) {
          const double v = fd.normal.block(al * m, col(node), m, 1).col(0).dot(dd.col(col(node)));
          fd.second_form((al * n + i) * n + jj, col(node)) = v;
          fd.second_form((al * n + jj) * n + i, col(node)) = v;
        }
    }

  for (int jj = 0; jj < n; ++jj) {
    const Eigen::MatrixXd dn = differentiate(chart, fd.normal, jj, kGeometryStencilOrder);
    for (std::size_t node = 0; node < nodes; ++node)
      for (int al = 0; al < k; ++al)
        for (int be = 0; be < k; ++be) {
          const double ab = dn.block(al * m, col(node), m, 1).col(0).dot(fd.normal.block(be * m, col(node), m, 1).col(0));
          const double ba = dn.block(be * m, col(node), m, 1).col(0).dot(fd.normal.block(al * m, col(node), m, 1).col(0));
          fd.normal_conn((jj * k + al) * k + be, col(node)) = 0.5 * (ab - ba);
        }
  }
  return fd;
}

}  // namespace divcurl
