#include "divcurl/golden.hpp"

#include <cmath>
#include <numbers>

#include "divcurl/error.hpp"

namespace divcurl {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::MatrixXd diag2(double a, double b) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

double bounding_diagonal(const ImmersionField& f) {
  const Eigen::VectorXd lo = f.points().rowwise().minCoeff();
  const Eigen::VectorXd hi = f.points().rowwise().maxCoeff();
  return (hi - lo).norm();
}

GoldenSurface assemble(std::string name, const Chart& chart, const PointMap& f, const MatrixMap& g,
                       FrameOptions frame, std::function<double(const Point&)> k) {
  ImmersionField imm = sample_immersion(chart, f);
  const double diam = bounding_diagonal(imm);
  return GoldenSurface{std::move(name), std::move(imm), sample_metric(chart, g), std::move(frame), diam, std::move(k)};
}

}  // namespace

const std::vector<std::string>& golden_surface_names() {
  static const std::vector<std::string> names{"cylinder", "graph_r4", "helicoid", "plane", "sphere"};
  return names;
}

GoldenSurface golden_surface(const std::string& name, int cells) {
  const std::vector<int> res{cells, cells};
  auto flat_k = [](const Point&) { return 0.0; };
  if (name == "plane") {
    Chart chart(res, {0.0, 0.0}, {1.0, 1.0}, {false, false});
    return assemble(name, chart, [](const Point& x) { return vec({x[0], x[1], 0.0}); },
                    [](const Point&) { return diag2(1.0, 1.0); }, {}, flat_k);
  }
  if (name == "cylinder") {
    const double r = 1.0;
    Chart chart(res, {0.0, 0.0}, {2.0 * kPi * r, 1.0}, {true, false});
    return assemble(
        name, chart, [r](const Point& x) { return vec({r * std::cos(x[0] / r), r * std::sin(x[0] / r), x[1]}); },
        [](const Point&) { return diag2(1.0, 1.0); }, {}, flat_k);
  }
  if (name == "sphere") {
    const double r = 1.0;
    Chart chart(res, {kPi / 4, 0.0}, {3 * kPi / 4, 2 * kPi}, {false, true});
    return assemble(
        name, chart,
        [r](const Point& x) {
          return vec({r * std::sin(x[0]) * std::cos(x[1]), r * std::sin(x[0]) * std::sin(x[1]), r * std::cos(x[0])});
        },
        [r](const Point& x) { return diag2(r * r, r * r * std::sin(x[0]) * std::sin(x[0])); }, {},
        [r](const Point&) { return 1.0 / (r * r); });
  }
  if (name == "helicoid") {
    Chart chart(res, {0.5, 0.0}, {1.5, kPi}, {false, false});
    return assemble(
        name, chart, [](const Point& x) { return vec({x[0] * std::cos(x[1]), x[0] * std::sin(x[1]), x[1]}); },
        [](const Point& x) { return diag2(1.0, 1.0 + x[0] * x[0]); },
        {}, [](const Point& x) { return -1.0 / std::pow(1.0 + x[0] * x[0], 2); });
  }
  if (name == "graph_r4") {
    Chart chart(res, {0.0, 0.0}, {1.0, 1.0}, {false, false}, 2);
    FrameOptions frame;
    frame.normal_references = {Eigen::VectorXd::Unit(4, 2), Eigen::VectorXd::Unit(4, 3)};
    return assemble(
        name, chart,
        [](const Point& x) {
          return vec({x[0], x[1], 0.4 * (x[0] * x[0] - x[1] * x[1]) + 0.1 * std::sin(3 * x[1]), 0.6 * x[0] * x[1]});
        },
        [](const Point& x) {
          Eigen::Vector2d du(0.8 * x[0], -0.8 * x[1] + 0.3 * std::cos(3 * x[1]));
          Eigen::Vector2d dv(0.6 * x[1], 0.6 * x[0]);
          return Eigen::MatrixXd(Eigen::Matrix2d::Identity() + du * du.transpose() + dv * dv.transpose());
        },
        frame, {});
  }
  throw InvalidArgument("unknown golden surface '" + name + "'");
}

MetricField conformal_flat_metric(int cells, double amplitude) {
  Chart chart({cells, cells}, {0.0, 0.0}, {1.0, 1.0}, {true, true});
  return sample_metric(chart, [amplitude](const Point& x) {
    const double s = std::exp(2.0 * amplitude * std::sin(2 * kPi * x[0]));
    return diag2(s, s);
  });
}

double conformal_flat_curvature(const Point& x, double amplitude) {
  const double lambda = amplitude * std::sin(2 * kPi * x[0]);
  const double laplacian = -amplitude * 4 * kPi * kPi * std::sin(2 * kPi * x[0]);
  return -laplacian * std::exp(-2.0 * lambda);
}

}  // namespace divcurl
