#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"

#include "divcurl/cartan.hpp"
#include "divcurl/error.hpp"
#include "divcurl/fitting.hpp"
#include "divcurl/golden.hpp"
#include "divcurl/procrustes.hpp"

using namespace divcurl;
constexpr double pi = std::numbers::pi;

namespace {

struct Realized {
  GoldenSurface s;
  FundamentalData fd;
  FramePack fp;
  std::size_t base;
  FrameIntegral fi;
};

std::size_t centre(const Chart& c) { return c.node_index({c.points(0) / 2, c.points(1) / 2, 0}); }

Realized realize(const std::string& name, int cells, SpanningTree tree = SpanningTree::comb_last_axis) {
  GoldenSurface s = golden_surface(name, cells);
  FundamentalData fd = fundamental_data(s.immersion, s.frame);
  FramePack fp = connection_forms(s.metric, fd);
  const std::size_t base = centre(fp.chart);
  FrameIntegral fi = solve_pfaff(fp, frame_at(fd, base), base, tree);
  fi = solve_poincare(fp, std::move(fi), s.immersion.point(base), tree);
  return {std::move(s), std::move(fd), std::move(fp), base, std::move(fi)};
}

Eigen::MatrixXd random_orthogonal(int m, std::mt19937_64& rng, bool improper = false) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m * m; ++i) a.data()[i] = z(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  if ((q.determinant() < 0) != improper) q.col(0) *= -1;
  return q;
}

// Flat plane with an extra so(3)-valued form ρΦ, Φ_12 = x dy, whose curvature dΦ ≠ 0.
FramePack injected_plane(double rho, int cells) {
  const GoldenSurface s = golden_surface("plane", cells);
  FramePack fp = connection_forms(s.metric, fundamental_data(s.immersion, s.frame));
  for (std::size_t node = 0; node < fp.chart.node_count(); ++node) {
    const double x = fp.chart.coordinate(node)[0];
    const auto c = static_cast<Eigen::Index>(node);
    fp.W((1 * 3 + 0) * 3 + 1, c) += rho * x;
    fp.W((1 * 3 + 1) * 3 + 0, c) -= rho * x;
  }
  return fp;
}

}  // namespace

TEST_CASE("connection forms") {
  SUBCASE("plane: W = 0 and w is the coordinate coframe") {
    const GoldenSurface s = golden_surface("plane", 16);
    const FramePack fp = connection_forms(s.metric, fundamental_data(s.immersion, s.frame));
    CHECK(fp.W.cwiseAbs().maxCoeff() <= 1e-12);
    for (std::size_t node = 0; node < fp.chart.node_count(); node += 11) {
      CHECK((fp.w_at(node, 0) - Eigen::RowVector3d(1, 0, 0)).norm() <= 1e-12);
      CHECK((fp.w_at(node, 1) - Eigen::RowVector3d(0, 1, 0)).norm() <= 1e-12);
    }
  }
  SUBCASE("unit sphere: ω¹₂ = cos θ dφ") {
    const GoldenSurface s = golden_surface("sphere", 64);
    const FramePack fp = connection_forms(s.metric, fundamental_data(s.immersion, s.frame));
    double err = 0.0;
    for (std::size_t node = 0; node < fp.chart.node_count(); ++node) {
      const double theta = fp.chart.coordinate(node)[0];
      err = std::max(err, std::abs(fp.W_at(node, 1)(0, 1) - std::cos(theta)));
      err = std::max(err, std::abs(fp.W_at(node, 0)(0, 1)));
    }
    CHECK(err <= 0.01 * std::cos(pi / 4));
  }
  SUBCASE("structural antisymmetry and zero padding") {
    for (const std::string& name : golden_surface_names()) {
      const GoldenSurface s = golden_surface(name, 16);
      const FramePack fp = connection_forms(s.metric, fundamental_data(s.immersion, s.frame));
      CHECK(fp.antisymmetry_defect() == 0.0);
      CHECK(fp.padding_defect() == 0.0);
    }
  }
  SUBCASE("a frame that is not orthonormal for g is rejected") {
    const GoldenSurface s = golden_surface("plane", 16);
    const FundamentalData fd = fundamental_data(s.immersion, s.frame);
    const MetricField doubled(s.metric.chart(), 4.0 * s.metric.components());
    CHECK_THROWS_AS(connection_forms(doubled, fd), GeometryError);
  }
}

TEST_CASE("structural residuals") {
  SUBCASE("flat data") {
    const GoldenSurface s = golden_surface("plane", 16);
    const StructuralResiduals r = structural_residuals(connection_forms(s.metric, fundamental_data(s.immersion, s.frame)));
    CHECK(r.first.sup <= 1e-12);
    CHECK(r.second.sup <= 1e-12);
  }
  SUBCASE("sphere: second order") {
    auto second = [](int cells) {
      const GoldenSurface s = golden_surface("sphere", cells);
      return structural_residuals(connection_forms(s.metric, fundamental_data(s.immersion, s.frame)));
    };
    const StructuralResiduals a = second(64), b = second(128);
    CHECK(a.second.sup > 1e-6);
    CHECK(measured_order(a.second.sup, b.second.sup).order >= 1.9);
    CHECK(measured_order(a.first.sup, b.first.sup).order >= 1.9);
  }
  SUBCASE("random antisymmetric W against a direct evaluation") {
    Chart chart({8, 9}, {0, 0}, {1, 2}, {true, false});
    const int m = 4;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    FramePack fp{chart, 2, 2, {}, {}};
    const Eigen::Index nodes = static_cast<Eigen::Index>(chart.node_count());
    fp.w = Eigen::MatrixXd::Zero(2 * m, nodes);
    fp.W = Eigen::MatrixXd::Zero(2 * m * m, nodes);
    for (Eigen::Index c = 0; c < nodes; ++c)
      for (int i = 0; i < 2; ++i) {
        for (int a = 0; a < 2; ++a) fp.w(i * m + a, c) = u(rng);
        for (int a = 0; a < m; ++a)
          for (int b = a + 1; b < m; ++b) {
            const double v = u(rng);
            fp.W((i * m + a) * m + b, c) = v;
            fp.W((i * m + b) * m + a, c) = -v;
          }
      }
    const StructuralResiduals r = structural_residuals(fp);

    // independent evaluation: explicit difference quotients per node
    auto partial = [&](const Eigen::MatrixXd& f, Eigen::Index row, std::size_t node, int axis) {
      const double h = chart.spacing(axis);
      const long long prev = chart.neighbour(node, axis, -1);
      const long long next = chart.neighbour(node, axis, 1);
      auto v = [&](long long q) { return f(row, static_cast<Eigen::Index>(q)); };
      if (prev < 0) return (-3 * v(static_cast<long long>(node)) + 4 * v(next) - v(chart.neighbour(node, axis, 2))) / (2 * h);
      if (next < 0) return (3 * v(static_cast<long long>(node)) - 4 * v(prev) + v(chart.neighbour(node, axis, -2))) / (2 * h);
      return (v(next) - v(prev)) / (2 * h);
    };
    double worst = 0.0;
    for (std::size_t node = 0; node < chart.node_count(); ++node) {
      const auto c = static_cast<Eigen::Index>(node);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          double wedge = 0.0;
          for (int e = 0; e < m; ++e)
            wedge += fp.W((0 * m + a) * m + e, c) * fp.W((1 * m + e) * m + b, c) -
                     fp.W((1 * m + a) * m + e, c) * fp.W((0 * m + e) * m + b, c);
          const double d = partial(fp.W, (1 * m + a) * m + b, node, 0) - partial(fp.W, (0 * m + a) * m + b, node, 1);
          worst = std::max(worst, std::abs(r.second.values(((a * m + b) * 2 + 0) * 2 + 1, c) - (d - wedge)));
          worst = std::max(worst, std::abs(r.second.values(((a * m + b) * 2 + 1) * 2 + 0, c) + (d - wedge)));
        }
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("Pfaff system") {
  SUBCASE("W = 0 keeps A constant") {
    const GoldenSurface s = golden_surface("plane", 16);
    const FramePack fp = connection_forms(s.metric, fundamental_data(s.immersion, s.frame));
    FramePack zero = fp;
    zero.W.setZero();
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd a0 = random_orthogonal(3, rng);
    const FrameIntegral fi = solve_pfaff(zero, a0, 5);
    for (std::size_t node = 0; node < fp.chart.node_count(); ++node) CHECK((fi.A_at(node) - a0).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(fi.holonomy_defect == 0.0);
  }
  SUBCASE("cylinder: A follows the closed-form rotating frame") {
    const Realized r = realize("cylinder", 128);
    double err = 0.0;
    for (std::size_t node = 0; node < r.fp.chart.node_count(); ++node) {
      const double x = r.fp.chart.coordinate(node)[0];
      Eigen::Matrix3d exact;
      exact << -std::sin(x), std::cos(x), 0, 0, 0, 1, std::cos(x), std::sin(x), 0;
      err = std::max(err, (r.fi.A_at(node) - exact).cwiseAbs().maxCoeff());
    }
    CHECK(err <= 1e-6);
    CHECK(r.fi.orthogonality_drift <= 1e-12);
    CHECK(r.fi.projection_correction <= 1e-8);
  }
  SUBCASE("defining relation dA·Aᵀ = W holds to second order") {
    const Realized a = realize("sphere", 32), b = realize("sphere", 64);
    CHECK(measured_order(pfaff_relation_residual(a.fp, a.fi), pfaff_relation_residual(b.fp, b.fi)).order >= 1.9);
  }
  SUBCASE("holonomy defect shrinks at order >= 2") {
    for (const char* name : {"sphere", "cylinder", "graph_r4", "helicoid"}) {
      const Realized a = realize(name, 32), b = realize(name, 64);
      INFO(name);
      CHECK(a.fi.holonomy_defect > 0.0);
      CHECK(measured_order(a.fi.holonomy_defect, b.fi.holonomy_defect).order >= 2.0);
    }
  }
  SUBCASE("injected curvature: holonomy is linear in the defect") {
    std::vector<double> rho, hol;
    for (double r : {1e-4, 1e-3, 1e-2}) {
      const FramePack fp = injected_plane(r, 32);
      rho.push_back(r);
      hol.push_back(solve_pfaff(fp, Eigen::Matrix3d::Identity(), 0).holonomy_defect);
    }
    CHECK(fit_order(rho, hol).order == doctest::Approx(1.0).epsilon(0.2));
    CHECK(structural_residuals(injected_plane(1e-2, 32)).second.sup == doctest::Approx(1e-2).epsilon(0.05));
  }
  SUBCASE("input validation") {
    const GoldenSurface s = golden_surface("plane", 8);
    FramePack fp = connection_forms(s.metric, fundamental_data(s.immersion, s.frame));
    CHECK_THROWS_AS(solve_pfaff(fp, 2.0 * Eigen::Matrix3d::Identity(), 0), InvalidArgument);
    CHECK_THROWS_AS(solve_pfaff(fp, Eigen::Matrix2d::Identity(), 0), ShapeError);
    fp.W(0, 3) = std::nan("");
    CHECK_THROWS_AS(solve_pfaff(fp, Eigen::Matrix3d::Identity(), 0), InvalidArgument);
    FrameIntegral empty{fp.chart, 3, 0, {}, {}, 0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(solve_poincare(fp, empty, Eigen::Vector3d::Zero()), InvalidArgument);
  }
}

TEST_CASE("Poincaré system and round trips") {
  SUBCASE("coordinate coframe with A = I gives f(x) = (x, 0)") {
    const GoldenSurface s = golden_surface("plane", 16);
    const FramePack fp = connection_forms(s.metric, fundamental_data(s.immersion, s.frame));
    const FrameIntegral fi = solve_poincare(fp, solve_pfaff(fp, Eigen::Matrix3d::Identity(), 0), Eigen::Vector3d::Zero());
    for (std::size_t node = 0; node < fp.chart.node_count(); ++node) {
      const Point x = fp.chart.coordinate(node);
      CHECK((fi.f.col(static_cast<Eigen::Index>(node)) - Eigen::Vector3d(x[0], x[1], 0)).norm() <= 1e-14);
    }
    CHECK(fi.closedness_defect <= 1e-14);
  }
  SUBCASE("cylinder and sphere patch reconstruct to 1e-4 of the diameter") {
    for (const char* name : {"cylinder", "sphere"}) {
      const Realized r = realize(name, 128);
      const RigidMotion m = rigid_motion_align(r.fi.immersion(), r.s.immersion);
      INFO(name);
      CHECK(m.rms <= 1e-4 * r.s.diameter);
      CHECK_FALSE(m.reflection);
      CHECK(isometry_defect(r.fi.immersion(), r.s.metric).sup <= 1e-3);
    }
  }
  SUBCASE("second fundamental form survives the round trip at second order") {
    for (const char* name : {"helicoid", "graph_r4"}) {
      double err[2];
      for (int level = 0; level < 2; ++level) {
        const Realized r = realize(name, 32 << level);
        const FundamentalData back = fundamental_data(r.fi.immersion(), r.s.frame);
        double e = 0.0;
        const Chart& c = r.fp.chart;
        for (std::size_t node = 0; node < c.node_count(); ++node) {
          // middle half of the chart: one-sided stencil kinks near the ends are first order
          const NodeIndex q = c.multi_index(node);
          bool middle = true;
          for (int a = 0; a < 2; ++a) middle = middle && 4 * q[a] >= c.cells(a) && 4 * q[a] <= 3 * c.cells(a);
          if (middle)
            e = std::max(e, (back.second_form.col(static_cast<Eigen::Index>(node)) - r.fd.second_form.col(static_cast<Eigen::Index>(node))).cwiseAbs().maxCoeff());
        }
        err[level] = e;
      }
      INFO(name);
      CHECK(measured_order(err[0], err[1]).order >= 1.9);
    }
  }
  SUBCASE("gauge covariance: another A0 and f0 give the same surface up to a rigid motion") {
    const Realized r = realize("sphere", 64);
    std::mt19937_64 rng(5);
    for (bool improper : {false, true}) {
      const Eigen::MatrixXd q = random_orthogonal(3, rng, improper);
      FrameIntegral fi = solve_pfaff(r.fp, frame_at(r.fd, r.base) * q, r.base);
      fi = solve_poincare(r.fp, std::move(fi), Eigen::Vector3d(3.0, -1.0, 0.5));
      const RigidMotion m = rigid_motion_align(fi.immersion(), r.fi.immersion());
      CHECK(m.rms <= 1e-8);
      CHECK(m.reflection == improper);
    }
  }
  SUBCASE("the other spanning tree agrees up to the holonomy") {
    const Realized a = realize("graph_r4", 64);
    const Realized b = realize("graph_r4", 64, SpanningTree::comb_first_axis);
    CHECK((a.fi.f - b.fi.f).cwiseAbs().maxCoeff() <= 10 * std::max(a.fi.closedness_defect, a.fi.holonomy_defect));
    CHECK(tree_parent(a.fp.chart, a.base, a.base, SpanningTree::comb_first_axis) == -1);
  }
  SUBCASE("longest path keeps A orthogonal") {
    const GoldenSurface s = golden_surface("helicoid", 128);
    const FundamentalData fd = fundamental_data(s.immersion, s.frame);
    const FramePack fp = connection_forms(s.metric, fd);
    const FrameIntegral fi = solve_pfaff(fp, frame_at(fd, 0), 0);  // corner base: longest tree paths
    CHECK(fi.orthogonality_drift <= 1e-8);
  }
}

TEST_CASE("rigid motion alignment") {
  const GoldenSurface s = golden_surface("sphere", 32);
  std::mt19937_64 rng(17);
  SUBCASE("identity") {
    const RigidMotion m = rigid_motion_align(s.immersion, s.immersion);
    CHECK((m.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(m.translation.norm() <= 1e-12);
    CHECK(m.rms <= 1e-12);
  }
  SUBCASE("recovers a random motion, proper or not") {
    for (bool improper : {false, true}) {
      const Eigen::MatrixXd q = random_orthogonal(3, rng, improper);
      const Eigen::Vector3d t(0.3, -2.0, 1.5);
      const ImmersionField moved(s.immersion.chart(), (q * s.immersion.points()).colwise() + t);
      const RigidMotion m = rigid_motion_align(s.immersion, moved);
      CHECK((m.rotation - q).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((m.translation - t).norm() <= 1e-10);
      CHECK(m.rms <= 1e-10);
      CHECK(m.reflection == improper);
      CHECK((apply(m, s.immersion).points() - moved.points()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
  SUBCASE("noise of rms size σ leaves rms ≈ σ") {
    const double sigma = 1e-3;
    std::normal_distribution<double> z(0.0, sigma / std::sqrt(3.0));
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd noisy = s.immersion.points();
      for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += z(rng);
      const RigidMotion m = rigid_motion_align(s.immersion, ImmersionField(s.immersion.chart(), noisy));
      CHECK(m.rms == doctest::Approx(sigma).epsilon(0.1));
    }
  }
  SUBCASE("degenerate cloud") {
    Chart c({8, 8}, {0, 0}, {1, 1}, {false, false});
    const ImmersionField line = sample_immersion(c, [](const Point& x) { return Eigen::VectorXd(Eigen::Vector3d(x[0], 0, 0)); });
    CHECK_THROWS_AS(rigid_motion_align(line, line), GeometryError);
    CHECK_THROWS_AS(rigid_motion_align(s.immersion, golden_surface("sphere", 16).immersion), ShapeError);
  }
}

TEST_CASE("frame integral container") {
  const Realized r = realize("helicoid", 16);
  const auto path = std::filesystem::temp_directory_path() / "divcurl_frame_integral.geom";
  write_geom(path, to_record(r.fi));
  const FrameIntegral back = frame_integral_from_record(read_geom(path));
  CHECK(back.A == r.fi.A);
  CHECK(back.f == r.fi.f);
  CHECK(back.base == r.base);
  CHECK(back.holonomy_defect == r.fi.holonomy_defect);
  CHECK(back.closedness_defect == r.fi.closedness_defect);
  write_geom(path, to_record(r.fp));
  CHECK_THROWS_AS(frame_integral_from_record(read_geom(path)), FormatError);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}
