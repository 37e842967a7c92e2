#include "frame_calculus.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "divcurl/error.hpp"

namespace divcurl::detail {

namespace {
Eigen::Index col(std::size_t node) { return static_cast<Eigen::Index>(node); }
}  // namespace

std::vector<Eigen::MatrixXd> FrameCalculus::along_frame(const Eigen::MatrixXd& fields) const {
  std::vector<Eigen::MatrixXd> d;
  for (int i = 0; i < n; ++i) d.push_back(differentiate(chart, fields, i, kSampledStencilOrder));
  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(fields.rows(), fields.cols()));
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(a)].col(col(node)) += ec(node, i, a) * d[static_cast<std::size_t>(i)].col(col(node));
  return out;
}

Eigen::MatrixXd FrameCalculus::exterior_derivative_on_frame(const Eigen::MatrixXd& forms) const {
  const Eigen::Index count = forms.rows() / n;
  std::vector<Eigen::MatrixXd> d;
  for (int i = 0; i < n; ++i) d.push_back(differentiate(chart, forms, i, kSampledStencilOrder));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(count * n * n, forms.cols());
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    for (Eigen::Index f = 0; f < count; ++f) {
      Eigen::MatrixXd dc(n, n);  // (dα)_ij = ∂_i α_j - ∂_j α_i
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          dc(i, j) = d[static_cast<std::size_t>(i)](f * n + j, col(node)) - d[static_cast<std::size_t>(j)](f * n + i, col(node));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double s = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += ec(node, i, a) * ec(node, j, b) * dc(i, j);
          out((f * n + a) * n + b, col(node)) = s;
        }
    }
  return out;
}

Eigen::MatrixXd FrameCalculus::divergence(const Eigen::MatrixXd& fields) const {
  const Eigen::Index count = fields.rows() / n;
  // √g V^i in coordinates, row v*n + i.
  Eigen::MatrixXd weighted(count * n, fields.cols());
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    for (Eigen::Index v = 0; v < count; ++v)
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += ec(node, i, a) * fields(v * n + a, col(node));
        weighted(v * n + i, col(node)) = sqrt_det(col(node)) * s;
      }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(count, fields.cols());
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd d = differentiate(chart, weighted, i, kSampledStencilOrder);
    for (Eigen::Index v = 0; v < count; ++v) out.row(v) += d.row(v * n + i);
  }
  for (std::size_t node = 0; node < chart.node_count(); ++node) out.col(col(node)) /= sqrt_det(col(node));
  return out;
}

MetricField frame_metric(const FundamentalData& fd) {
  const int n = fd.n;
  Eigen::MatrixXd c(n * n, col(fd.chart.node_count()));
  for (std::size_t node = 0; node < fd.chart.node_count(); ++node) {
    Eigen::MatrixXd g = fd.metric(node);
    g = 0.5 * (g + g.transpose());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i * n + j, col(node)) = g(i, j);
  }
  return MetricField(fd.chart, std::move(c));
}

FrameCalculus frame_calculus(const MetricField& g, const FundamentalData& fd) {
  const Chart& chart = fd.chart;
  if (!(g.chart().dim() == chart.dim() && g.chart().node_count() == chart.node_count()))
    throw ShapeError("metric and fundamental data live on different charts");
  const int n = fd.n;
  const int k = fd.k;
  const std::size_t nodes = chart.node_count();

  FrameCalculus fc{chart, n, k, {}, {}, {}, {}, {}, {}, {}, {}};
  fc.e = fd.frame_coefficients;
  fc.e_inv.resize(n * n, col(nodes));
  fc.b.resize(k * n * n, col(nodes));
  fc.nc.resize(n * k * k, col(nodes));
  fc.levi.resize(n * n * n, col(nodes));
  fc.bracket.resize(n * n * n, col(nodes));
  fc.sqrt_det.resize(col(nodes));

  for (std::size_t node = 0; node < nodes; ++node) {
    const Eigen::MatrixXd em = fd.frame_matrix(node);
    const Eigen::MatrixXd inv = em.inverse();
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i) fc.e_inv(a * n + i, col(node)) = inv(a, i);
    fc.sqrt_det(col(node)) = std::sqrt(g.at(node).determinant());
    for (int al = 0; al < k; ++al) {
      Eigen::MatrixXd bm(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) bm(i, j) = fd.b(node, al, i, j);
      const Eigen::MatrixXd bf = em.transpose() * bm * em;
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) fc.b((al * n + a) * n + c, col(node)) = bf(a, c);
    }
    for (int a = 0; a < n; ++a)
      for (int al = 0; al < k; ++al)
        for (int be = 0; be < k; ++be) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += em(j, a) * fd.conn(node, j, al, be);
          fc.nc((a * k + al) * k + be, col(node)) = s;
        }
  }

  // ∂_i E(k, b) for the bracket and the Levi-Civita coefficients. Using the same
  // stencil in both makes ∇_X Y - ∇_Y X = [X, Y] hold exactly on the grid.
  std::vector<Eigen::MatrixXd> de;
  for (int i = 0; i < n; ++i) de.push_back(differentiate(chart, fc.e, i, kSampledStencilOrder));
  const Eigen::MatrixXd gamma = christoffel_symbols(g);
  for (std::size_t node = 0; node < nodes; ++node) {
    const Eigen::MatrixXd gm = g.at(node);
    auto e_at = [&](int i, int a) { return fc.ec(node, i, a); };
    auto de_at = [&](int i, int kk, int b) { return de[static_cast<std::size_t>(i)](kk * n + b, col(node)); };
    auto gam = [&](int kk, int i, int j) { return gamma((kk * n + i) * n + j, col(node)); };
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Eigen::VectorXd cov(n);  // coordinate components of ∇_{e_a} e_b
        Eigen::VectorXd br(n);   // coordinate components of [e_a, e_b]
        for (int kk = 0; kk < n; ++kk) {
          double s = 0.0;
          double t = 0.0;
          for (int i = 0; i < n; ++i) {
            s += e_at(i, a) * de_at(i, kk, b);
            for (int j = 0; j < n; ++j) s += e_at(i, a) * gam(kk, i, j) * e_at(j, b);
            t += e_at(i, a) * de_at(i, kk, b) - e_at(i, b) * de_at(i, kk, a);
          }
          cov(kk) = s;
          br(kk) = t;
        }
        const Eigen::VectorXd gcov = gm * cov;
        for (int c = 0; c < n; ++c) {
          double lv = 0.0;
          double bc = 0.0;
          for (int kk = 0; kk < n; ++kk) {
            lv += gcov(kk) * e_at(kk, c);
            bc += fc.e_inv(c * n + kk, col(node)) * br(kk);
          }
          fc.levi((a * n + b) * n + c, col(node)) = lv;
          fc.bracket((a * n + b) * n + c, col(node)) = bc;
        }
      }
  }

  Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(n * n, col(nodes));
  for (int a = 0; a < n; ++a) unit.row(a * n + a).setOnes();
  fc.div = fc.divergence(unit);
  return fc;
}

void aggregate(const Chart& chart, const Eigen::MatrixXd& values, int margin, double& sup, double& l2) {
  sup = 0.0;
  double sum = 0.0;
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    if (!chart.interior(node, margin) || values.rows() == 0) continue;
    sup = std::max(sup, values.col(col(node)).cwiseAbs().maxCoeff());
    sum += values.col(col(node)).squaredNorm();
  }
  l2 = std::sqrt(sum * chart.cell_volume());
}

}  // namespace divcurl::detail
