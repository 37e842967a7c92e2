#include "divcurl/gcr.hpp"

#include <algorithm>
#include <cmath>

#include "divcurl/error.hpp"
#include "frame_calculus.hpp"

namespace divcurl {

namespace {

Eigen::Index col(std::size_t node) { return static_cast<Eigen::Index>(node); }

constexpr int kMargin = 1;

ResidualField finish(const Chart& chart, Eigen::MatrixXd values) {
  ResidualField r;
  r.values = std::move(values);
  detail::aggregate(chart, r.values, kMargin, r.sup, r.l2);
  return r;
}

// R(e_a, e_b, e_c, e_d), row ((a*n + b)*n + c)*n + d.
Eigen::MatrixXd frame_curvature(const detail::FrameCalculus& fc, const CurvatureField& r) {
  const int n = fc.n;
  if (r.n != n || r.chart.node_count() != fc.chart.node_count())
    throw ShapeError("curvature field does not match the fundamental data");
  Eigen::MatrixXd out(n * n * n * n, col(fc.chart.node_count()));
  for (std::size_t node = 0; node < fc.chart.node_count(); ++node) {
    // Contract one index at a time.
    std::vector<double> t(static_cast<std::size_t>(n * n * n * n));
    std::vector<double> u(t.size());
    for (int i = 0; i < n * n * n * n; ++i) t[static_cast<std::size_t>(i)] = r.components(i, col(node));
    for (int slot = 0; slot < 4; ++slot) {
      const int stride = slot == 0 ? n * n * n : slot == 1 ? n * n : slot == 2 ? n : 1;
      for (int idx = 0; idx < n * n * n * n; ++idx) {
        const int a = (idx / stride) % n;
        const int base = idx - a * stride;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += fc.ec(node, i, a) * t[static_cast<std::size_t>(base + i * stride)];
        u[static_cast<std::size_t>(idx)] = s;
      }
      std::swap(t, u);
    }
    for (int i = 0; i < n * n * n * n; ++i) out(i, col(node)) = t[static_cast<std::size_t>(i)];
  }
  return out;
}

struct Contracted {
  Eigen::MatrixXd b;   // row (α*n + a)*n + c
  Eigen::MatrixXd nc;  // row (a*k + α)*k + β
};

Contracted contract(const FundamentalData& fd) {
  const int n = fd.n;
  const int k = fd.k;
  Contracted c{Eigen::MatrixXd(k * n * n, col(fd.chart.node_count())),
               Eigen::MatrixXd(n * k * k, col(fd.chart.node_count()))};
  for (std::size_t node = 0; node < fd.chart.node_count(); ++node) {
    const Eigen::MatrixXd e = fd.frame_matrix(node);
    for (int al = 0; al < k; ++al) {
      Eigen::MatrixXd bm(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) bm(i, j) = fd.b(node, al, i, j);
      const Eigen::MatrixXd bf = e.transpose() * bm * e;
      for (int a = 0; a < n; ++a)
        for (int cc = 0; cc < n; ++cc) c.b((al * n + a) * n + cc, col(node)) = bf(a, cc);
    }
    for (int a = 0; a < n; ++a)
      for (int al = 0; al < k; ++al)
        for (int be = 0; be < k; ++be) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += e(j, a) * fd.conn(node, j, al, be);
          c.nc((a * k + al) * k + be, col(node)) = s;
        }
  }
  return c;
}

}  // namespace

double GcrResiduals::max_sup() const { return std::max({gauss.sup, codazzi.sup, ricci.sup}); }

GcrResiduals gcr_residuals(const MetricField& g, const FundamentalData& fd) {
  const detail::FrameCalculus fc = detail::frame_calculus(g, fd);
  const int n = fc.n;
  const int k = fc.k;
  const std::size_t nodes = fd.chart.node_count();
  const Eigen::MatrixXd rf = frame_curvature(fc, riemann_curvature(g));
  const auto db = fc.along_frame(fc.b);    // db[a] row (α*n + b)*n + c = e_a B(e_b, e_c, η_α)
  const auto dn = fc.along_frame(fc.nc);   // dn[a] row (b*k + α)*k + β

  auto B = [&](std::size_t node, int al, int a, int c) { return fc.b((al * n + a) * n + c, col(node)); };
  auto N = [&](std::size_t node, int a, int al, int be) { return fc.nc((a * k + al) * k + be, col(node)); };
  auto L = [&](std::size_t node, int a, int b, int c) { return fc.levi((a * n + b) * n + c, col(node)); };
  auto Br = [&](std::size_t node, int a, int b, int c) { return fc.bracket((a * n + b) * n + c, col(node)); };

  Eigen::MatrixXd gauss(n * n * n * n, col(nodes));
  Eigen::MatrixXd codazzi(n * n * n * k, col(nodes));
  Eigen::MatrixXd ricci = Eigen::MatrixXd::Zero(n * n * k * k, col(nodes));
  for (std::size_t node = 0; node < nodes; ++node) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            double s = 0.0;
            for (int al = 0; al < k; ++al) s += B(node, al, a, d) * B(node, al, b, c) - B(node, al, b, d) * B(node, al, a, c);
            const int row = ((a * n + b) * n + c) * n + d;
            gauss(row, col(node)) = s - rf(row, col(node));
          }

    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int al = 0; al < k; ++al) {
            const double lhs = db[static_cast<std::size_t>(a)]((al * n + b) * n + c, col(node)) -
                               db[static_cast<std::size_t>(b)]((al * n + a) * n + c, col(node));
            double rhs = 0.0;
            for (int e = 0; e < n; ++e) {
              rhs += Br(node, a, b, e) * B(node, al, e, c);
              rhs -= L(node, b, c, e) * B(node, al, a, e);
              rhs += L(node, a, c, e) * B(node, al, b, e);
            }
            for (int be = 0; be < k; ++be) {
              rhs -= N(node, b, al, be) * B(node, be, a, c);
              rhs += N(node, a, al, be) * B(node, be, b, c);
            }
            codazzi(((a * n + b) * n + c) * k + al, col(node)) = lhs - rhs;
          }

    if (k == 1) continue;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int al = 0; al < k; ++al)
          for (int be = 0; be < k; ++be) {
            const double lhs = dn[static_cast<std::size_t>(a)]((b * k + al) * k + be, col(node)) -
                               dn[static_cast<std::size_t>(b)]((a * k + al) * k + be, col(node));
            double rhs = 0.0;
            for (int e = 0; e < n; ++e) rhs += Br(node, a, b, e) * N(node, e, al, be);
            for (int ga = 0; ga < k; ++ga) rhs += -N(node, a, al, ga) * N(node, b, be, ga) + N(node, b, al, ga) * N(node, a, be, ga);
            // B(Xξ - ∇⊥_X ξ, Y, η): the tangential part of Xξ is -sum_c B(X, e_c, ξ) e_c.
            for (int c = 0; c < n; ++c) rhs += -B(node, al, a, c) * B(node, be, c, b) + B(node, be, a, c) * B(node, al, c, b);
            ricci(((a * n + b) * k + al) * k + be, col(node)) = lhs - rhs;
          }
  }
  return {finish(fd.chart, std::move(gauss)), finish(fd.chart, std::move(codazzi)), finish(fd.chart, std::move(ricci))};
}

double VOmegaFields::antisymmetry_defect() const {
  double worst = 0.0;
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int e = 0; e < n; ++e) {
          for (int c = 0; c < n; ++c)
            for (int al = 0; al < k; ++al)
              worst = std::max(worst, std::abs(v_b(vb_row(c, al, a, b, e), col(node)) + v_b(vb_row(c, al, b, a, e), col(node))));
          for (int al = 0; al < k; ++al)
            for (int be = 0; be < k; ++be)
              worst = std::max(worst, std::abs(v_n(vn_row(al, be, a, b, e), col(node)) + v_n(vn_row(al, be, b, a, e), col(node))));
        }
  return worst;
}

VOmegaFields build_v_omega(const FundamentalData& fd) {
  const int n = fd.n;
  const int k = fd.k;
  const std::size_t nodes = fd.chart.node_count();
  const Contracted c = contract(fd);
  VOmegaFields vo{fd.chart, n, k, {}, {}, {}, {}};
  vo.v_b = Eigen::MatrixXd::Zero(n * k * n * n * n, col(nodes));
  vo.omega_b.resize(n * k * n, col(nodes));
  vo.v_n = Eigen::MatrixXd::Zero(k * k * n * n * n, col(nodes));
  vo.omega_n.resize(k * k * n, col(nodes));
  auto B = [&](std::size_t node, int al, int a, int cc) { return c.b((al * n + a) * n + cc, col(node)); };
  auto N = [&](std::size_t node, int a, int al, int be) { return c.nc((a * k + al) * k + be, col(node)); };
  for (std::size_t node = 0; node < nodes; ++node) {
    for (int cc = 0; cc < n; ++cc)
      for (int al = 0; al < k; ++al) {
        for (int d = 0; d < n; ++d) vo.omega_b((cc * k + al) * n + d, col(node)) = -B(node, al, d, cc);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            vo.v_b(vo.vb_row(cc, al, a, b, b), col(node)) += B(node, al, a, cc);
            vo.v_b(vo.vb_row(cc, al, a, b, a), col(node)) -= B(node, al, b, cc);
          }
      }
    for (int al = 0; al < k; ++al)
      for (int be = 0; be < k; ++be) {
        for (int d = 0; d < n; ++d) vo.omega_n((al * k + be) * n + d, col(node)) = N(node, d, al, be);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            vo.v_n(vo.vn_row(al, be, a, b, a), col(node)) += N(node, b, al, be);
            vo.v_n(vo.vn_row(al, be, a, b, b), col(node)) -= N(node, a, al, be);
          }
      }
  }
  return vo;
}

namespace {

void check_pair(const VOmegaFields& vo, const FundamentalData& fd) {
  if (vo.n != fd.n || vo.k != fd.k || !(vo.chart == fd.chart))
    throw ShapeError("V/Ω fields and fundamental data do not match");
}

// Coordinate components of Ω^B_{c,α}: row (c*k + α)*n + i = -sum_j B^α_ij E(j, c).
Eigen::MatrixXd omega_b_coordinates(const FundamentalData& fd) {
  const int n = fd.n;
  const int k = fd.k;
  Eigen::MatrixXd out(n * k * n, col(fd.chart.node_count()));
  for (std::size_t node = 0; node < fd.chart.node_count(); ++node)
    for (int c = 0; c < n; ++c)
      for (int al = 0; al < k; ++al)
        for (int i = 0; i < n; ++i) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += fd.b(node, al, i, j) * fd.frame_coefficients(j * n + c, col(node));
          out((c * k + al) * n + i, col(node)) = -s;
        }
  return out;
}

// Coordinate components of Ω^⊥_{α,β}: row (α*k + β)*n + i.
Eigen::MatrixXd omega_n_coordinates(const FundamentalData& fd) {
  const int n = fd.n;
  const int k = fd.k;
  Eigen::MatrixXd out(k * k * n, col(fd.chart.node_count()));
  for (std::size_t node = 0; node < fd.chart.node_count(); ++node)
    for (int al = 0; al < k; ++al)
      for (int be = 0; be < k; ++be)
        for (int i = 0; i < n; ++i) out((al * k + be) * n + i, col(node)) = fd.conn(node, i, al, be);
  return out;
}

// Ω(V) = sum_e Ω(e_e) V^e.
double apply(const Eigen::MatrixXd& omega, Eigen::Index omega_row, const Eigen::MatrixXd& v, Eigen::Index v_row, int n,
             std::size_t node) {
  double s = 0.0;
  for (int e = 0; e < n; ++e) s += omega(omega_row + e, col(node)) * v(v_row + e, col(node));
  return s;
}

}  // namespace

DivCurlIdentity divcurl_identity_check(const VOmegaFields& vo, const FundamentalData& fd) {
  check_pair(vo, fd);
  const detail::FrameCalculus fc = detail::frame_calculus(detail::frame_metric(fd), fd);
  const int n = fc.n;
  const int k = fc.k;
  const std::size_t nodes = fd.chart.node_count();

  const Eigen::MatrixXd div_b = fc.divergence(vo.v_b);
  const Eigen::MatrixXd div_n = fc.divergence(vo.v_n);
  const Eigen::MatrixXd curl_b = fc.exterior_derivative_on_frame(omega_b_coordinates(fd));
  const Eigen::MatrixXd curl_n = fc.exterior_derivative_on_frame(omega_n_coordinates(fd));
  const auto db = fc.along_frame(fc.b);
  const auto dn = fc.along_frame(fc.nc);

  auto B = [&](std::size_t node, int al, int a, int c) { return fc.b((al * n + a) * n + c, col(node)); };
  auto N = [&](std::size_t node, int a, int al, int be) { return fc.nc((a * k + al) * k + be, col(node)); };
  auto Br = [&](std::size_t node, int a, int b, int c) { return fc.bracket((a * n + b) * n + c, col(node)); };
  auto Dv = [&](std::size_t node, int a) { return fc.div(a, col(node)); };

  Eigen::MatrixXd res_b(n * k * n * n, col(nodes));
  Eigen::MatrixXd res_n(k * k * n * n, col(nodes));
  double worst_gap = 0.0;
  double worst_div = 0.0;
  for (std::size_t node = 0; node < nodes; ++node) {
    const bool counted = fd.chart.interior(node, kMargin);
    for (int c = 0; c < n; ++c)
      for (int al = 0; al < k; ++al)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const int row = ((c * k + al) * n + a) * n + b;
            double linear = B(node, al, a, c) * Dv(node, b) - B(node, al, b, c) * Dv(node, a);
            for (int e = 0; e < n; ++e) linear -= Br(node, a, b, e) * B(node, al, e, c);
            res_b(row, col(node)) = div_b(row, col(node)) - curl_b(row, col(node)) - linear;
            const double expanded = db[static_cast<std::size_t>(b)]((al * n + a) * n + c, col(node)) -
                                    db[static_cast<std::size_t>(a)]((al * n + b) * n + c, col(node)) +
                                    B(node, al, a, c) * Dv(node, b) - B(node, al, b, c) * Dv(node, a);
            if (counted) {
              worst_gap = std::max(worst_gap, std::abs(expanded - div_b(row, col(node))));
              worst_div = std::max(worst_div, std::abs(div_b(row, col(node))));
            }
          }
    for (int al = 0; al < k; ++al)
      for (int be = 0; be < k; ++be)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const int row = ((al * k + be) * n + a) * n + b;
            double linear = N(node, b, al, be) * Dv(node, a) - N(node, a, al, be) * Dv(node, b);
            for (int e = 0; e < n; ++e) linear += Br(node, a, b, e) * N(node, e, al, be);
            res_n(row, col(node)) = div_n(row, col(node)) - curl_n(row, col(node)) - linear;
            const double expanded = dn[static_cast<std::size_t>(a)]((b * k + al) * k + be, col(node)) -
                                    dn[static_cast<std::size_t>(b)]((a * k + al) * k + be, col(node)) +
                                    N(node, b, al, be) * Dv(node, a) - N(node, a, al, be) * Dv(node, b);
            if (counted) {
              worst_gap = std::max(worst_gap, std::abs(expanded - div_n(row, col(node))));
              worst_div = std::max(worst_div, std::abs(div_n(row, col(node))));
            }
          }
  }
  DivCurlIdentity out;
  out.b_family = finish(fd.chart, std::move(res_b));
  out.normal_family = finish(fd.chart, std::move(res_n));
  out.expansion_agreement = worst_div > 0.0 ? worst_gap / worst_div : worst_gap;
  return out;
}

GcrResiduals reformulated_gcr_residuals(const VOmegaFields& vo, const FundamentalData& fd, const MetricField& g,
                                        const CurvatureField& r) {
  check_pair(vo, fd);
  const detail::FrameCalculus fc = detail::frame_calculus(g, fd);
  const int n = fc.n;
  const int k = fc.k;
  const std::size_t nodes = fd.chart.node_count();
  const Eigen::MatrixXd rf = frame_curvature(fc, r);
  const Eigen::MatrixXd curl_b = fc.exterior_derivative_on_frame(omega_b_coordinates(fd));
  const Eigen::MatrixXd curl_n = fc.exterior_derivative_on_frame(omega_n_coordinates(fd));

  auto B = [&](std::size_t node, int al, int a, int c) { return fc.b((al * n + a) * n + c, col(node)); };
  auto L = [&](std::size_t node, int a, int b, int c) { return fc.levi((a * n + b) * n + c, col(node)); };

  Eigen::MatrixXd gauss(n * n * n * n, col(nodes));
  Eigen::MatrixXd codazzi(n * n * n * k, col(nodes));
  Eigen::MatrixXd ricci = Eigen::MatrixXd::Zero(n * n * k * k, col(nodes));
  for (std::size_t node = 0; node < nodes; ++node) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            double s = 0.0;
            for (int al = 0; al < k; ++al)
              s += apply(vo.omega_b, (d * k + al) * n, vo.v_b, vo.vb_row(c, al, a, b, 0), n, node);
            const int row = ((a * n + b) * n + c) * n + d;
            gauss(row, col(node)) = s - rf(row, col(node));
          }

    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int al = 0; al < k; ++al) {
            double s = curl_b(((c * k + al) * n + a) * n + b, col(node));
            for (int be = 0; be < k; ++be)
              s += apply(vo.omega_b, (c * k + be) * n, vo.v_n, vo.vn_row(al, be, a, b, 0), n, node);
            for (int e = 0; e < n; ++e) s += L(node, a, c, e) * B(node, al, b, e) - L(node, b, c, e) * B(node, al, a, e);
            codazzi(((a * n + b) * n + c) * k + al, col(node)) = s;
          }

    if (k == 1) continue;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int al = 0; al < k; ++al)
          for (int be = 0; be < k; ++be) {
            double s = curl_n(((al * k + be) * n + a) * n + b, col(node));
            for (int ga = 0; ga < k; ++ga)
              s += apply(vo.omega_n, (al * k + ga) * n, vo.v_n, vo.vn_row(be, ga, a, b, 0), n, node);
            for (int c = 0; c < n; ++c)
              s -= apply(vo.omega_b, (c * k + be) * n, vo.v_b, vo.vb_row(c, al, a, b, 0), n, node);
            ricci(((a * n + b) * k + al) * k + be, col(node)) = s;
          }
  }
  return {finish(fd.chart, std::move(gauss)), finish(fd.chart, std::move(codazzi)), finish(fd.chart, std::move(ricci))};
}

bool residuals_agree(double a, double b, double factor, double floor) {
  if (a <= floor && b <= floor) return true;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  return hi <= factor * lo;
}

}  // namespace divcurl
