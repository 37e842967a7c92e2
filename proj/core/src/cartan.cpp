#include "divcurl/cartan.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/Dense>

#include "divcurl/error.hpp"
#include "frame_calculus.hpp"

namespace divcurl {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Index col(std::size_t node) { return static_cast<Eigen::Index>(node); }

Eigen::MatrixXd square_block(const Eigen::MatrixXd& field, Eigen::Index column, Eigen::Index offset, int m) {
  return Eigen::Map<const RowMajor>(field.col(column).data() + offset, m, m);
}

Eigen::VectorXd node_value(const Eigen::MatrixXd& field, long long node) {
  return field.col(static_cast<Eigen::Index>(node));
}

// Cubic interpolation of every row of `field` to the midpoint of the edge (lo, lo + 1)
// along `axis`; near a non-periodic end the four-point stencil shifts inward.
Eigen::VectorXd midpoint(const Chart& chart, const Eigen::MatrixXd& field, std::size_t lo, int axis) {
  const long long p0 = static_cast<long long>(lo);
  const long long pm = chart.neighbour(lo, axis, -1);
  const long long p1 = chart.neighbour(lo, axis, 1);
  const long long p2 = chart.neighbour(lo, axis, 2);
  if (pm >= 0 && p2 >= 0)
    return (-node_value(field, pm) + 9 * node_value(field, p0) + 9 * node_value(field, p1) - node_value(field, p2)) / 16;
  if (pm < 0) {
    const long long p3 = chart.neighbour(lo, axis, 3);
    return (5 * node_value(field, p0) + 15 * node_value(field, p1) - 5 * node_value(field, p2) + node_value(field, p3)) / 16;
  }
  const long long pmm = chart.neighbour(lo, axis, -2);
  return (node_value(field, pmm) - 5 * node_value(field, pm) + 15 * node_value(field, p0) + 5 * node_value(field, p1)) / 16;
}

Eigen::MatrixXd polar(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

double orthogonality(const Eigen::MatrixXd& a) {
  return (a.transpose() * a - Eigen::MatrixXd::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff();
}

struct Edge {
  std::size_t from;
  std::size_t to;
  int axis;
  int dir;  // +1 when `to` is the next node along axis
};

struct TreeWalk {
  std::vector<Edge> tree;     // parent -> child, in breadth-first order
  std::vector<Edge> closing;  // every other grid edge, including periodic wraps
};

// The tree edge into `node`: the parent and the step from parent to node.
Edge parent_edge(const Chart& chart, std::size_t node, std::size_t base, SpanningTree kind) {
  const NodeIndex x = chart.multi_index(node);
  const NodeIndex b = chart.multi_index(base);
  const int dim = chart.dim();
  for (int s = 0; s < dim; ++s) {
    const int a = kind == SpanningTree::comb_last_axis ? dim - 1 - s : s;
    if (x[a] != b[a]) {
      NodeIndex p = x;
      const int dir = x[a] < b[a] ? -1 : 1;
      p[a] -= dir;
      return {chart.node_index(p), node, a, dir};
    }
  }
  return {node, node, -1, 0};
}

TreeWalk walk(const Chart& chart, std::size_t base, SpanningTree kind) {
  const std::size_t nodes = chart.node_count();
  std::vector<std::vector<Edge>> children(nodes);
  std::vector<long long> parent(nodes, -1);
  for (std::size_t node = 0; node < nodes; ++node) {
    const Edge e = parent_edge(chart, node, base, kind);
    if (e.axis < 0) continue;
    parent[node] = static_cast<long long>(e.from);
    children[e.from].push_back(e);
  }
  TreeWalk w;
  std::deque<std::size_t> queue{base};
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (const Edge& e : children[u]) {
      w.tree.push_back(e);
      queue.push_back(e.to);
    }
  }
  if (w.tree.size() + 1 != nodes) throw Error("spanning tree does not reach every node");
  for (std::size_t node = 0; node < nodes; ++node)
    for (int a = 0; a < chart.dim(); ++a) {
      const long long next = chart.neighbour(node, a, 1);
      if (next < 0 || next == static_cast<long long>(node)) continue;
      const auto v = static_cast<std::size_t>(next);
      const bool in_tree = parent[v] == static_cast<long long>(node) || parent[node] == next;
      if (!in_tree) w.closing.push_back({node, v, a, 1});
    }
  return w;
}

struct Step {
  Eigen::MatrixXd A;
  double correction = 0.0;
};

// One RK4 step of dA/dt = W_axis(t) A across an edge, followed by polar projection.
Step transport(const FramePack& fp, const Edge& e, const Eigen::MatrixXd& a) {
  const int m = fp.ambient();
  const double h = fp.chart.spacing(e.axis) * e.dir;
  const std::size_t lo = e.dir > 0 ? e.from : e.to;
  const Eigen::VectorXd mid = midpoint(fp.chart, fp.W, lo, e.axis);
  const Eigen::MatrixXd w0 = fp.W_at(e.from, e.axis);
  const Eigen::MatrixXd w1 = fp.W_at(e.to, e.axis);
  const Eigen::MatrixXd wm = Eigen::Map<const RowMajor>(mid.data() + e.axis * m * m, m, m);
  const Eigen::MatrixXd k1 = w0 * a;
  const Eigen::MatrixXd k2 = wm * (a + 0.5 * h * k1);
  const Eigen::MatrixXd k3 = wm * (a + 0.5 * h * k2);
  const Eigen::MatrixXd k4 = w1 * (a + h * k3);
  const Eigen::MatrixXd next = a + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  const double drift = orthogonality(next);
  // W = 0 leaves A untouched; projecting anyway would only add roundoff
  return {drift > 1e-14 ? polar(next) : next, drift};
}

// ∫ w·A dt across an edge: Simpson with the Hermite midpoint of A.
Eigen::VectorXd edge_integral(const FramePack& fp, const FrameIntegral& fi, const Edge& e) {
  const int m = fp.ambient();
  const double h = fp.chart.spacing(e.axis) * e.dir;
  const std::size_t lo = e.dir > 0 ? e.from : e.to;
  const Eigen::MatrixXd a0 = fi.A_at(e.from);
  const Eigen::MatrixXd a1 = fi.A_at(e.to);
  const Eigen::MatrixXd am = 0.5 * (a0 + a1) + (h / 8) * (fp.W_at(e.from, e.axis) * a0 - fp.W_at(e.to, e.axis) * a1);
  const Eigen::VectorXd wmid = midpoint(fp.chart, fp.w, lo, e.axis);
  const Eigen::RowVectorXd wm = wmid.segment(e.axis * m, m).transpose();
  const Eigen::RowVectorXd sum = fp.w_at(e.from, e.axis) * a0 + 4 * wm * am + fp.w_at(e.to, e.axis) * a1;
  return (h / 6) * sum.transpose();
}

}  // namespace

Eigen::MatrixXd FramePack::w_at(std::size_t node, int axis) const {
  const int m = ambient();
  return w.block(axis * m, col(node), m, 1).transpose();
}

Eigen::MatrixXd FramePack::W_at(std::size_t node, int axis) const {
  const int m = ambient();
  return square_block(W, col(node), static_cast<Eigen::Index>(axis) * m * m, m);
}

double FramePack::antisymmetry_defect() const {
  double worst = 0.0;
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    for (int i = 0; i < n; ++i) {
      const Eigen::MatrixXd x = W_at(node, i);
      worst = std::max(worst, (x + x.transpose()).cwiseAbs().maxCoeff());
    }
  return worst;
}

double FramePack::padding_defect() const {
  double worst = 0.0;
  const int m = ambient();
  for (int i = 0; i < n; ++i)
    for (int a = n; a < m; ++a) worst = std::max(worst, w.row(i * m + a).cwiseAbs().maxCoeff());
  return worst;
}

FramePack connection_forms(const MetricField& g, const FundamentalData& fd, double tolerance) {
  const detail::FrameCalculus fc = detail::frame_calculus(g, fd);
  const int n = fd.n;
  const int k = fd.k;
  const int m = n + k;
  const std::size_t nodes = fd.chart.node_count();
  FramePack fp{fd.chart, n, k, Eigen::MatrixXd::Zero(n * m, col(nodes)), Eigen::MatrixXd::Zero(n * m * m, col(nodes))};
  auto W = [&](int i, int a, int b, std::size_t node) -> double& { return fp.W((i * m + a) * m + b, col(node)); };

  for (std::size_t node = 0; node < nodes; ++node) {
    const Eigen::MatrixXd e = fd.frame_matrix(node);
    const double defect = (e.transpose() * g.at(node) * e - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (defect > tolerance) throw GeometryError("tangent frame is not orthonormal for the metric", node);

    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < n; ++a) fp.w(i * m + a, col(node)) = fc.e_inv(a * n + i, col(node));
      // tangential block: W_ab(∂_i) = <∇_{∂_i} e_a, e_b>, ∂_i = sum_c E^{-1}(c, i) e_c
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          double s = 0.0;
          for (int c = 0; c < n; ++c)
            s += fc.e_inv(c * n + i, col(node)) *
                 0.5 * (fc.levi((c * n + a) * n + b, col(node)) - fc.levi((c * n + b) * n + a, col(node)));
          W(i, a, b, node) = s;
          W(i, b, a, node) = -s;
        }
      for (int a = 0; a < n; ++a)
        for (int al = 0; al < k; ++al) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += e(j, a) * fd.b(node, al, i, j);
          W(i, a, n + al, node) = s;
          W(i, n + al, a, node) = -s;
        }
      for (int al = 0; al < k; ++al)
        for (int be = al + 1; be < k; ++be) {
          const double s = 0.5 * (fd.conn(node, i, al, be) - fd.conn(node, i, be, al));
          W(i, n + al, n + be, node) = s;
          W(i, n + be, n + al, node) = -s;
        }
    }
  }
  return fp;
}

StructuralResiduals structural_residuals(const FramePack& fp) {
  const Chart& chart = fp.chart;
  const int n = fp.n;
  const int m = fp.ambient();
  const std::size_t nodes = chart.node_count();
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::MatrixXd> dW;
  for (int i = 0; i < n; ++i) {
    dw.push_back(differentiate(chart, fp.w, i, detail::kSampledStencilOrder));
    dW.push_back(differentiate(chart, fp.W, i, detail::kSampledStencilOrder));
  }
  StructuralResiduals r;
  r.first.values = Eigen::MatrixXd::Zero(m * n * n, col(nodes));
  r.second.values = Eigen::MatrixXd::Zero(m * m * n * n, col(nodes));
  for (std::size_t node = 0; node < nodes; ++node) {
    std::vector<Eigen::MatrixXd> Wn;
    std::vector<Eigen::RowVectorXd> wn;
    for (int i = 0; i < n; ++i) {
      Wn.push_back(fp.W_at(node, i));
      wn.push_back(fp.w_at(node, i));
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto di = static_cast<std::size_t>(i);
        const auto dj = static_cast<std::size_t>(j);
        const Eigen::MatrixXd wedge2 = Wn[di] * Wn[dj] - Wn[dj] * Wn[di];
        const Eigen::RowVectorXd wedge1 = wn[di] * Wn[dj] - wn[dj] * Wn[di];
        for (int a = 0; a < m; ++a) {
          const double d1 = dw[di](j * m + a, col(node)) - dw[dj](i * m + a, col(node));
          r.first.values((a * n + i) * n + j, col(node)) = d1 - wedge1(a);
          for (int b = 0; b < m; ++b) {
            const double d2 = dW[di]((j * m + a) * m + b, col(node)) - dW[dj]((i * m + a) * m + b, col(node));
            r.second.values(((a * m + b) * n + i) * n + j, col(node)) = d2 - wedge2(a, b);
          }
        }
      }
  }
  detail::aggregate(chart, r.first.values, 1, r.first.sup, r.first.l2);
  detail::aggregate(chart, r.second.values, 1, r.second.sup, r.second.l2);
  return r;
}

long long tree_parent(const Chart& chart, std::size_t node, std::size_t base, SpanningTree tree) {
  const Edge e = parent_edge(chart, node, base, tree);
  return e.axis < 0 ? -1 : static_cast<long long>(e.from);
}

Eigen::MatrixXd FrameIntegral::A_at(std::size_t node) const { return square_block(A, col(node), 0, m); }

ImmersionField FrameIntegral::immersion() const {
  if (f.size() == 0) throw InvalidArgument("frame integral has no immersion: run solve_poincare first");
  return ImmersionField(chart.with_codim(m - chart.dim()), f);
}

Eigen::MatrixXd frame_at(const FundamentalData& fd, std::size_t node) {
  const int m = fd.ambient();
  Eigen::MatrixXd a(m, m);
  for (int r = 0; r < fd.n; ++r) a.row(r) = fd.tangent.block(r * m, col(node), m, 1).transpose();
  for (int al = 0; al < fd.k; ++al) a.row(fd.n + al) = fd.normal.block(al * m, col(node), m, 1).transpose();
  return a;
}

FrameIntegral solve_pfaff(const FramePack& fp, const Eigen::MatrixXd& A0, std::size_t base, SpanningTree tree) {
  const int m = fp.ambient();
  const std::size_t nodes = fp.chart.node_count();
  if (A0.rows() != m || A0.cols() != m) throw ShapeError("initial frame must be (n+k) x (n+k)");
  if (orthogonality(A0) > 1e-10) throw InvalidArgument("initial frame is not orthogonal");
  if (base >= nodes) throw InvalidArgument("base node outside the chart");
  if (!fp.W.allFinite() || !fp.w.allFinite()) throw InvalidArgument("connection forms are not finite");

  FrameIntegral fi{fp.chart, m, base, Eigen::MatrixXd::Zero(m * m, col(nodes)), {}, 0.0, 0.0, 0.0, 0.0};
  auto store = [&](std::size_t node, const Eigen::MatrixXd& a) {
    Eigen::Map<RowMajor>(fi.A.col(col(node)).data(), m, m) = a;
  };
  store(base, A0);
  fi.orthogonality_drift = orthogonality(A0);
  const TreeWalk walker = walk(fp.chart, base, tree);
  for (const Edge& e : walker.tree) {
    const Step s = transport(fp, e, fi.A_at(e.from));
    store(e.to, s.A);
    fi.projection_correction = std::max(fi.projection_correction, s.correction);
    fi.orthogonality_drift = std::max(fi.orthogonality_drift, orthogonality(s.A));
  }
  for (const Edge& e : walker.closing) {
    const Step s = transport(fp, e, fi.A_at(e.from));
    fi.holonomy_defect = std::max(fi.holonomy_defect, (s.A - fi.A_at(e.to)).norm());
  }
  return fi;
}

FrameIntegral solve_poincare(const FramePack& fp, FrameIntegral fi, const Eigen::VectorXd& f0, SpanningTree tree) {
  const int m = fp.ambient();
  const std::size_t nodes = fp.chart.node_count();
  if (fi.A.cols() != col(nodes) || fi.A.rows() != m * m) throw InvalidArgument("frame integral has no A field");
  if (f0.size() != m) throw ShapeError("base point must have n+k components");
  fi.f = Eigen::MatrixXd::Zero(m, col(nodes));
  fi.f.col(col(fi.base)) = f0;
  const TreeWalk walker = walk(fp.chart, fi.base, tree);
  for (const Edge& e : walker.tree) fi.f.col(col(e.to)) = fi.f.col(col(e.from)) + edge_integral(fp, fi, e);
  fi.closedness_defect = 0.0;
  for (const Edge& e : walker.closing) {
    const Eigen::VectorXd gap = fi.f.col(col(e.from)) + edge_integral(fp, fi, e) - fi.f.col(col(e.to));
    fi.closedness_defect = std::max(fi.closedness_defect, gap.norm());
  }
  return fi;
}

double pfaff_relation_residual(const FramePack& fp, const FrameIntegral& fi) {
  if (fi.A.size() == 0) throw InvalidArgument("frame integral has no A field");
  double worst = 0.0;
  for (int i = 0; i < fp.n; ++i) {
    const Eigen::MatrixXd d = differentiate(fp.chart, fi.A, i, detail::kSampledStencilOrder);
    for (std::size_t node = 0; node < fp.chart.node_count(); ++node) {
      if (!fp.chart.interior(node, 1)) continue;
      const Eigen::MatrixXd da = square_block(d, col(node), 0, fi.m);
      worst = std::max(worst, (da * fi.A_at(node).transpose() - fp.W_at(node, i)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

GeomRecord to_record(const FramePack& fp) { return {"frame_pack", fp.chart, {{"w", fp.w}, {"W", fp.W}}}; }

GeomRecord to_record(const FrameIntegral& fi) {
  GeomRecord r{"frame_integral", fi.chart, {}};
  if (fi.A.size() > 0) r.blocks.emplace_back("A", fi.A);
  if (fi.f.size() > 0) r.blocks.emplace_back("f", fi.f);
  r.scalars = {{"ambient", fi.m},
               {"base", static_cast<double>(fi.base)},
               {"holonomy_defect", fi.holonomy_defect},
               {"closedness_defect", fi.closedness_defect},
               {"orthogonality_drift", fi.orthogonality_drift},
               {"projection_correction", fi.projection_correction}};
  return r;
}

FrameIntegral frame_integral_from_record(const GeomRecord& r) {
  if (r.kind != "frame_integral") throw FormatError("GEOM record holds '" + r.kind + "', expected 'frame_integral'");
  FrameIntegral fi{r.chart, static_cast<int>(r.scalar("ambient")), static_cast<std::size_t>(r.scalar("base")),
                   {}, {}, r.scalar("holonomy_defect"), r.scalar("closedness_defect"),
                   r.scalar("orthogonality_drift"), r.scalar("projection_correction")};
  for (const auto& [name, block] : r.blocks) {
    if (name == "A") fi.A = block;
    if (name == "f") fi.f = block;
  }
  if (fi.A.size() > 0 && fi.A.rows() != fi.m * fi.m) throw FormatError("frame_integral A block has the wrong shape");
  if (fi.f.size() > 0 && fi.f.rows() != fi.m) throw FormatError("frame_integral f block has the wrong shape");
  return fi;
}

}  // namespace divcurl
