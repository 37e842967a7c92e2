#include "divcurl/procrustes.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "divcurl/error.hpp"

namespace divcurl {

Eigen::VectorXd node_weights(const Chart& chart) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(chart.node_count()));
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const NodeIndex m = chart.multi_index(node);
    double v = chart.cell_volume();
    for (int a = 0; a < chart.dim(); ++a)
      if (!chart.periodic(a) && (m[a] == 0 || m[a] == chart.cells(a))) v *= 0.5;
    w(static_cast<Eigen::Index>(node)) = v;
  }
  return w;
}

RigidMotion rigid_motion_align(const ImmersionField& f1, const ImmersionField& f2) {
  if (!(f1.chart() == f2.chart())) throw ShapeError("alignment needs both immersions on the same chart");
  const Eigen::MatrixXd& p = f1.points();
  const Eigen::MatrixXd& q = f2.points();
  const Eigen::VectorXd w = node_weights(f1.chart());
  const double total = w.sum();
  const Eigen::VectorXd cp = p * w / total;
  const Eigen::VectorXd cq = q * w / total;
  const Eigen::MatrixXd pc = p.colwise() - cp;
  const Eigen::MatrixXd qc = q.colwise() - cq;

  const Eigen::MatrixXd cov = pc * w.asDiagonal() * pc.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  const int dim = f1.chart().dim();
  if (ev(ev.size() - dim) <= 1e-24 * std::max(1.0, ev(ev.size() - 1)))
    throw GeometryError("point cloud has rank below the chart dimension", 0);

  // Q maximizes tr(Qᵀ H) with H = sum w (q - cq)(p - cp)ᵀ.
  const Eigen::MatrixXd h = qc * w.asDiagonal() * pc.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RigidMotion r;
  r.rotation = svd.matrixU() * svd.matrixV().transpose();
  r.translation = cq - r.rotation * cp;
  r.reflection = r.rotation.determinant() < 0;
  const Eigen::MatrixXd residual = (r.rotation * p).colwise() + r.translation - q;
  r.rms = std::sqrt(residual.colwise().squaredNorm().dot(w) / total);
  return r;
}

ImmersionField apply(const RigidMotion& motion, const ImmersionField& f) {
  return ImmersionField(f.chart(), (motion.rotation * f.points()).colwise() + motion.translation);
}

}  // namespace divcurl
