#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"

#include "divcurl/error.hpp"
#include "divcurl/fitting.hpp"
#include "divcurl/gcr.hpp"
#include "divcurl/geom_io.hpp"
#include "divcurl/golden.hpp"

using namespace divcurl;
constexpr double pi = std::numbers::pi;

namespace {

Eigen::VectorXd vec3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

double max_interior(const Chart& chart, const Eigen::VectorXd& v) {
  double m = 0.0;
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    if (chart.interior(node, 1)) m = std::max(m, std::abs(v(static_cast<Eigen::Index>(node))));
  return m;
}

struct Pipeline {
  GoldenSurface s;
  FundamentalData fd;
  GcrResiduals direct;
  VOmegaFields vo;
};

Pipeline run(const std::string& name, int cells) {
  GoldenSurface s = golden_surface(name, cells);
  FundamentalData fd = fundamental_data(s.immersion, s.frame);
  GcrResiduals direct = gcr_residuals(s.metric, fd);
  VOmegaFields vo = build_v_omega(fd);
  return {std::move(s), std::move(fd), std::move(direct), std::move(vo)};
}

// Three-dimensional hypersurface in R^4 used to exercise n = 3.
ImmersionField graph_3d(int cells) {
  Chart chart({cells, cells, cells}, {0, 0, 0}, {1, 1, 1}, {false, false, false});
  return sample_immersion(chart, [](const Point& x) {
    Eigen::VectorXd p(4);
    p << x[0], x[1], x[2], 0.3 * std::sin(x[0] + 2 * x[1]) * std::cos(x[2]) + 0.2 * x[0] * x[2];
    return p;
  });
}

}  // namespace

TEST_CASE("chart bookkeeping") {
  Chart c({8, 10}, {0.0, -1.0}, {1.0, 1.0}, {true, false});
  CHECK(c.points(0) == 8);
  CHECK(c.points(1) == 11);
  CHECK(c.node_count() == 88);
  CHECK(c.spacing(1) == doctest::Approx(0.2));
  const std::size_t corner = c.node_index({0, 0, 0});
  CHECK(c.neighbour(corner, 0, -1) == static_cast<long long>(c.node_index({7, 0, 0})));
  CHECK(c.neighbour(corner, 1, -1) == -1);
  CHECK_FALSE(c.interior(corner, 1));
  CHECK(c.interior(c.node_index({0, 1, 0}), 1));
  CHECK(c.coordinate(c.node_index({2, 10, 0}))[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(Chart({4, 8}, {0, 0}, {1, 1}, {true, true}), InvalidArgument);
  CHECK_THROWS_AS(Chart({8, 8}, {0, 0}, {1, 0}, {true, true}), InvalidArgument);
  CHECK_THROWS_AS(c.node_index({0, 11, 0}), InvalidArgument);
}

TEST_CASE("finite differences") {
  SUBCASE("fourth order stencils are exact on quartics, including the one-sided ends") {
    Chart c({12, 8}, {-1.0, 0.0}, {2.0, 1.0}, {false, true});
    Eigen::MatrixXd v(1, static_cast<Eigen::Index>(c.node_count()));
    for (std::size_t i = 0; i < c.node_count(); ++i) v(0, static_cast<Eigen::Index>(i)) = std::pow(c.coordinate(i)[0], 4);
    const Eigen::MatrixXd d = differentiate(c, v, 0, 4);
    for (std::size_t i = 0; i < c.node_count(); ++i)
      CHECK(d(0, static_cast<Eigen::Index>(i)) == doctest::Approx(4 * std::pow(c.coordinate(i)[0], 3)).epsilon(1e-10));
    const Eigen::MatrixXd d2 = differentiate(c, v, 0, 2);
    // second-order one-sided ends are exact on quadratics only; interior centred ones too
    Eigen::MatrixXd q = v.array().sqrt();
    const Eigen::MatrixXd dq = differentiate(c, q, 0, 2);
    for (std::size_t i = 0; i < c.node_count(); ++i)
      CHECK(dq(0, static_cast<Eigen::Index>(i)) == doctest::Approx(2 * c.coordinate(i)[0]).epsilon(1e-10));
    CHECK(d2.allFinite());
  }
  SUBCASE("periodic convergence orders") {
    std::vector<double> h, e4, e2;
    for (int n : {16, 32, 64}) {
      Chart c({n, 8}, {0.0, 0.0}, {2 * pi, 1.0}, {true, true});
      Eigen::MatrixXd v(1, static_cast<Eigen::Index>(c.node_count()));
      for (std::size_t i = 0; i < c.node_count(); ++i) v(0, static_cast<Eigen::Index>(i)) = std::sin(c.coordinate(i)[0]);
      double m4 = 0.0, m2 = 0.0;
      const Eigen::MatrixXd d4 = differentiate(c, v, 0, 4), d2 = differentiate(c, v, 0, 2);
      for (std::size_t i = 0; i < c.node_count(); ++i) {
        const double exact = std::cos(c.coordinate(i)[0]);
        m4 = std::max(m4, std::abs(d4(0, static_cast<Eigen::Index>(i)) - exact));
        m2 = std::max(m2, std::abs(d2(0, static_cast<Eigen::Index>(i)) - exact));
      }
      h.push_back(c.spacing(0));
      e4.push_back(m4);
      e2.push_back(m2);
    }
    CHECK(fit_order(h, e4).order == doctest::Approx(4.0).epsilon(0.03));
    CHECK(fit_order(h, e2).order == doctest::Approx(2.0).epsilon(0.03));
  }
}

TEST_CASE("induced metric and isometry defect") {
  SUBCASE("plane gives the identity") {
    const GoldenSurface s = golden_surface("plane", 16);
    const DefectNorms d = isometry_defect(s.immersion, MetricField::identity(s.immersion.chart()));
    CHECK(d.sup <= 1e-12);
    CHECK(d.l2 <= 1e-12);
  }
  SUBCASE("stretched plane (2x, y, 0) has defect 3 in the (1,1) entry") {
    Chart c({16, 16}, {0, 0}, {1, 1}, {false, false});
    const ImmersionField f = sample_immersion(c, [](const Point& x) { return vec3(2 * x[0], x[1], 0.0); });
    CHECK(isometry_defect(f, MetricField::identity(c)).sup == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(induced_metric(f).at(5)(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("cylinder and sphere converge at fourth order") {
    for (const char* name : {"cylinder", "sphere"}) {
      const GoldenSurface a = golden_surface(name, 32), b = golden_surface(name, 64);
      const double ea = isometry_defect(a.immersion, a.metric).sup;
      const double eb = isometry_defect(b.immersion, b.metric).sup;
      CHECK(measured_order(ea, eb).order >= 3.8);
      if (std::string(name) == "cylinder") CHECK(eb <= 1e-4);
    }
  }
  SUBCASE("induced metric is symmetric positive definite") {
    const GoldenSurface s = golden_surface("graph_r4", 16);
    const MetricField g = induced_metric(s.immersion);
    for (std::size_t node = 0; node < g.chart().node_count(); node += 7) {
      const Eigen::MatrixXd m = g.at(node);
      CHECK((m - m.transpose()).norm() == 0.0);
      CHECK(m.ldlt().isPositive());
    }
  }
  SUBCASE("rank loss reports the node") {
    Chart c({8, 8}, {0, 0}, {1, 1}, {false, false});
    const ImmersionField f = sample_immersion(c, [](const Point& x) { return vec3(x[0], x[0], 0.0); });
    try {
      (void)induced_metric(f);
      FAIL("expected GeometryError");
    } catch (const GeometryError& e) {
      CHECK(e.node() == 0);
    }
  }
  SUBCASE("metric validation") {
    Chart c({8, 8}, {0, 0}, {1, 1}, {true, true});
    CHECK_THROWS_AS(sample_metric(c, [](const Point&) { return Eigen::MatrixXd(Eigen::Matrix2d::Zero()); }),
                    GeometryError);
    CHECK_THROWS_AS(sample_metric(c,
                                  [](const Point&) {
                                    Eigen::MatrixXd m = Eigen::Matrix2d::Identity();
                                    m(0, 1) = 0.5;
                                    return m;
                                  }),
                    GeometryError);
  }
}

TEST_CASE("riemann curvature") {
  SUBCASE("flat metric") {
    Chart c({16, 16}, {0, 0}, {1, 1}, {true, false});
    const CurvatureField r = riemann_curvature(MetricField::identity(c));
    CHECK(r.components.cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("unit sphere: K = 1 within 1% at N = 64") {
    const GoldenSurface s = golden_surface("sphere", 64);
    const CurvatureField r = riemann_curvature(s.metric);
    const Eigen::VectorXd k = sectional_curvature(r, s.metric);
    CHECK(max_interior(s.metric.chart(), k.array() - 1.0) <= 0.01);
    // same from the finite-difference induced metric
    const MetricField gi = induced_metric(s.immersion);
    CHECK(max_interior(gi.chart(), sectional_curvature(riemann_curvature(gi), gi).array() - 1.0) <= 0.01);
  }
  SUBCASE("conformal metric: K = -Δλ e^{-2λ} within 2%") {
    const MetricField g = conformal_flat_metric(64, 0.1);
    const Eigen::VectorXd k = sectional_curvature(riemann_curvature(g), g);
    double err = 0.0, scale = 0.0;
    for (std::size_t node = 0; node < g.chart().node_count(); ++node) {
      const double exact = conformal_flat_curvature(g.chart().coordinate(node), 0.1);
      err = std::max(err, std::abs(k(static_cast<Eigen::Index>(node)) - exact));
      scale = std::max(scale, std::abs(exact));
    }
    CHECK(err <= 0.02 * scale);
  }
  SUBCASE("symmetries and first Bianchi, n = 2 and n = 3") {
    const GoldenSurface s = golden_surface("graph_r4", 16);
    const MetricField g2 = induced_metric(s.immersion);
    const MetricField g3 = induced_metric(graph_3d(10));
    for (const MetricField* g : {&g2, &g3}) {
      const CurvatureField r = riemann_curvature(*g);
      CHECK(r.bianchi_residual <= 1e-8);
      const int n = r.n;
      double worst = 0.0, pair = 0.0;
      for (std::size_t node = 0; node < g->chart().node_count(); node += 5)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
              for (int l = 0; l < n; ++l) {
                worst = std::max(worst, std::abs(r.at(node, i, j, k, l) + r.at(node, j, i, k, l)));
                worst = std::max(worst, std::abs(r.at(node, i, j, k, l) + r.at(node, i, j, l, k)));
                pair = std::max(pair, std::abs(r.at(node, i, j, k, l) - r.at(node, k, l, i, j)));
              }
      CHECK(worst <= 1e-14);
      CHECK(pair <= 1e-10);
    }
  }
}

TEST_CASE("fundamental data") {
  SUBCASE("plane") {
    const Pipeline p = run("plane", 16);
    CHECK(p.fd.second_form.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(p.fd.normal_conn.cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.fd.frame_defect() <= 1e-10);
  }
  SUBCASE("cylinder principal curvatures (1/r, 0)") {
    const GoldenSurface s = golden_surface("cylinder", 64);
    const FundamentalData fd = fundamental_data(s.immersion, s.frame);
    for (std::size_t node = 0; node < s.immersion.chart().node_count(); node += 97) {
      Eigen::EigenSolver<Eigen::MatrixXd> es(fd.shape_operator(node, 0));
      Eigen::VectorXd k = es.eigenvalues().real().cwiseAbs();
      std::sort(k.data(), k.data() + k.size());
      CHECK(k(0) <= 0.01);
      CHECK(k(1) == doctest::Approx(1.0).epsilon(0.01));
    }
  }
  SUBCASE("sphere is umbilic: B = -(1/r) g for the outward normal") {
    const GoldenSurface s = golden_surface("sphere", 64);
    for (int orientation : {1, -1}) {
      FrameOptions opt;
      opt.orientation = orientation;
      const FundamentalData fd = fundamental_data(s.immersion, opt);
      double err = 0.0;
      for (std::size_t node = 0; node < s.metric.chart().node_count(); ++node) {
        const Eigen::MatrixXd g = s.metric.at(node);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) err = std::max(err, std::abs(fd.b(node, 0, i, j) + orientation * g(i, j)));
      }
      CHECK(err <= 0.01);
      // outward normal points away from the origin
      const Eigen::VectorXd eta = fd.normal.col(100).head(3);
      CHECK(orientation * eta.dot(s.immersion.point(100)) > 0.99);
    }
  }
  SUBCASE("invariants in codimension two") {
    const Pipeline p = run("graph_r4", 32);
    CHECK(p.fd.frame_defect() <= 1e-10);
    CHECK(p.fd.symmetry_defect() == 0.0);
    CHECK(p.fd.normal_conn.cwiseAbs().maxCoeff() > 0.05);  // the normal bundle is twisted
    // g from the frame coefficients agrees with the induced metric
    const MetricField gi = induced_metric(p.s.immersion);
    CHECK((p.fd.metric(77) - gi.at(77)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("frame discontinuity is reported") {
    // eight nodes around a circle: neighbouring normals differ by 45 degrees
    Chart c({8, 8}, {0, 0}, {2 * pi, 1}, {true, false});
    const ImmersionField f =
        sample_immersion(c, [](const Point& x) { return vec3(std::cos(x[0]), std::sin(x[0]), x[1]); });
    CHECK_THROWS_AS(fundamental_data(f), GeometryError);
  }
  SUBCASE("bad options") {
    const GoldenSurface s = golden_surface("plane", 8);
    FrameOptions opt;
    opt.orientation = 0;
    CHECK_THROWS_AS(fundamental_data(s.immersion, opt), InvalidArgument);
    opt.orientation = 1;
    opt.normal_references = {Eigen::Vector3d(1, 0, 0)};  // tangent: no normal component
    CHECK_THROWS_AS(fundamental_data(s.immersion, opt), GeometryError);
  }
}

TEST_CASE("GCR residuals on golden surfaces") {
  SUBCASE("plane") {
    const Pipeline p = run("plane", 32);
    CHECK(p.direct.max_sup() <= 1e-10);
  }
  SUBCASE("sphere: second order, codimension one has no Ricci residual") {
    const Pipeline a = run("sphere", 64), b = run("sphere", 128);
    CHECK(a.direct.max_sup() > 1e-6);
    CHECK(measured_order(a.direct.max_sup(), b.direct.max_sup()).order >= 1.9);
    CHECK(measured_order(a.direct.gauss.sup, b.direct.gauss.sup).order >= 1.9);
    CHECK(a.direct.ricci.values.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("cylinder residuals sit at roundoff") {
    const Pipeline p = run("cylinder", 64);
    CHECK(p.direct.max_sup() <= 1e-9);
  }
  SUBCASE("codimension two: all three equations converge, fixing the Ricci sign") {
    const Pipeline a = run("graph_r4", 32), b = run("graph_r4", 64);
    CHECK(a.direct.ricci.sup > 1e-5);
    CHECK(measured_order(a.direct.ricci.sup, b.direct.ricci.sup).order >= 1.9);
    CHECK(measured_order(a.direct.codazzi.sup, b.direct.codazzi.sup).order >= 1.9);
    // flipping the sign of the curvature term in the Ricci equation leaves an O(1) residual
    FundamentalData flipped = a.fd;
    flipped.normal_conn *= -1.0;
    CHECK(gcr_residuals(a.s.metric, flipped).ricci.sup > 100 * a.direct.ricci.sup);
  }
  SUBCASE("n = 3 hypersurface") {
    const ImmersionField fa = graph_3d(12), fb = graph_3d(24);
    const GcrResiduals ra = gcr_residuals(induced_metric(fa), fundamental_data(fa));
    const GcrResiduals rb = gcr_residuals(induced_metric(fb), fundamental_data(fb));
    CHECK(measured_order(ra.gauss.sup, rb.gauss.sup).order >= 1.9);
    CHECK(measured_order(ra.codazzi.sup, rb.codazzi.sup).order >= 1.9);
  }
  SUBCASE("B scaled by 1.1 leaves a Gauss residual of 0.21 |R|") {
    const Pipeline p = run("sphere", 64);
    FundamentalData scaled = p.fd;
    scaled.second_form *= 1.1;
    const double res = gcr_residuals(p.s.metric, scaled).gauss.sup;
    CHECK(res == doctest::Approx(0.21).epsilon(0.05));
  }
}

TEST_CASE("V and Omega fields") {
  SUBCASE("vanishing B") {
    const Pipeline p = run("plane", 16);
    FundamentalData zero = p.fd;
    zero.second_form.setZero();
    const VOmegaFields vo = build_v_omega(zero);
    CHECK(vo.v_b.cwiseAbs().maxCoeff() == 0.0);
    CHECK(vo.omega_b.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("antisymmetry is exact") {
    const Pipeline p = run("graph_r4", 16);
    CHECK(p.vo.antisymmetry_defect() == 0.0);
  }
  SUBCASE("sphere: Omega^B_{Z,eta}(Y) = -B(Y,Z,eta) = -(1/r) g(Y,Z) for the inward normal") {
    const GoldenSurface s = golden_surface("sphere", 64);
    FrameOptions inward;
    inward.orientation = -1;
    const VOmegaFields vo = build_v_omega(fundamental_data(s.immersion, inward));
    double err = 0.0;
    for (std::size_t node = 0; node < s.metric.chart().node_count(); ++node)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) err = std::max(err, std::abs(vo.omega_b(c * 2 + d, static_cast<Eigen::Index>(node)) + (c == d)));
    CHECK(err <= 0.01);
  }
}

TEST_CASE("div-curl identity") {
  SUBCASE("plane") {
    const Pipeline p = run("plane", 16);
    const DivCurlIdentity id = divcurl_identity_check(p.vo, p.fd);
    CHECK(id.b_family.sup <= 1e-10);
    CHECK(id.normal_family.sup <= 1e-10);
  }
  SUBCASE("sphere converges") {
    const Pipeline a = run("sphere", 64), b = run("sphere", 128);
    const double ra = divcurl_identity_check(a.vo, a.fd).b_family.sup;
    const double rb = divcurl_identity_check(b.vo, b.fd).b_family.sup;
    CHECK(measured_order(ra, rb).order >= 0.9);
  }
  SUBCASE("intrinsic divergence and product-rule expansion agree on linear data") {
    Chart c({16, 16}, {0, 0}, {1, 1}, {false, false}, 2);
    const ImmersionField f = sample_immersion(c, [](const Point& x) {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(4);
      p << x[0], x[1], 0.0, 0.0;
      return p;
    });
    FrameOptions opt;
    opt.normal_references = {Eigen::VectorXd::Unit(4, 2), Eigen::VectorXd::Unit(4, 3)};
    FundamentalData fd = fundamental_data(f, opt);
    for (std::size_t node = 0; node < c.node_count(); ++node) {
      const Point x = c.coordinate(node);
      const auto col = static_cast<Eigen::Index>(node);
      for (int al = 0; al < 2; ++al) {
        fd.second_form((al * 2 + 0) * 2 + 0, col) = 1.0 + 2 * x[0] - x[1] + al;
        fd.second_form((al * 2 + 0) * 2 + 1, col) = fd.second_form((al * 2 + 1) * 2 + 0, col) = 0.5 * x[0] + 3 * x[1];
        fd.second_form((al * 2 + 1) * 2 + 1, col) = -2.0 + x[1] * (al + 1);
      }
      for (int j = 0; j < 2; ++j) {
        const double v = 0.3 + x[0] * (j + 1) - 2 * x[1];
        fd.normal_conn((j * 2 + 0) * 2 + 1, col) = v;
        fd.normal_conn((j * 2 + 1) * 2 + 0, col) = -v;
      }
    }
    const DivCurlIdentity id = divcurl_identity_check(build_v_omega(fd), fd);
    CHECK(id.expansion_agreement <= 1e-8);
    CHECK(id.b_family.sup <= 1e-10);
    CHECK(id.normal_family.sup <= 1e-10);
  }
}

TEST_CASE("reformulated GCR equations") {
  SUBCASE("agree with the direct residuals on every golden surface") {
    for (const std::string& name : golden_surface_names()) {
      const Pipeline p = run(name, 64);
      const GcrResiduals re = reformulated_gcr_residuals(p.vo, p.fd, p.s.metric, riemann_curvature(p.s.metric));
      INFO(name);
      CHECK(residuals_agree(re.gauss.sup, p.direct.gauss.sup));
      CHECK(residuals_agree(re.codazzi.sup, p.direct.codazzi.sup));
      CHECK(residuals_agree(re.ricci.sup, p.direct.ricci.sup));
      if (name == "plane") CHECK(re.max_sup() <= 1e-10);
    }
  }
  SUBCASE("randomly perturbed B: reformulated Gauss tracks direct Gauss") {
    const Pipeline p = run("sphere", 32);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    FundamentalData fd = p.fd;
    for (Eigen::Index node = 0; node < fd.second_form.cols(); ++node) {
      const double a = u(rng), b = u(rng), c = u(rng);
      fd.second_form(0, node) += a;
      fd.second_form(1, node) += b;
      fd.second_form(2, node) += b;
      fd.second_form(3, node) += c;
    }
    const GcrResiduals direct = gcr_residuals(p.s.metric, fd);
    const GcrResiduals re = reformulated_gcr_residuals(build_v_omega(fd), fd, p.s.metric, riemann_curvature(p.s.metric));
    CHECK(re.gauss.sup == doctest::Approx(direct.gauss.sup).epsilon(0.1));
    CHECK(re.gauss.l2 == doctest::Approx(direct.gauss.l2).epsilon(0.1));
  }
}

TEST_CASE("GEOM container") {
  const auto dir = std::filesystem::temp_directory_path() / "divcurl_geom_test";
  std::filesystem::create_directories(dir);
  const GoldenSurface s = golden_surface("graph_r4", 8);
  const FundamentalData fd = fundamental_data(s.immersion, s.frame);

  write_geom(dir / "f.geom", to_record(s.immersion));
  const ImmersionField f2 = immersion_from_record(read_geom(dir / "f.geom"));
  CHECK(f2.chart() == s.immersion.chart());
  CHECK(f2.points() == s.immersion.points());
  CHECK(std::filesystem::exists(dir / "f.geom.json"));

  write_geom(dir / "g.geom", to_record(s.metric));
  CHECK(metric_from_record(read_geom(dir / "g.geom")).components() == s.metric.components());

  write_geom(dir / "fd.geom", to_record(fd));
  const FundamentalData fd2 = fundamental_data_from_record(read_geom(dir / "fd.geom"));
  CHECK(fd2.second_form == fd.second_form);
  CHECK(fd2.normal_conn == fd.normal_conn);
  CHECK(fd2.tangent == fd.tangent);

  CHECK_THROWS_AS(metric_from_record(read_geom(dir / "f.geom")), FormatError);
  {
    std::ofstream bad(dir / "bad.geom", std::ios::binary);
    bad << "GEOX";
  }
  CHECK_THROWS_AS(read_geom(dir / "bad.geom"), FormatError);
  {
    std::ofstream app(dir / "f.geom", std::ios::binary | std::ios::app);
    app << 'x';
  }
  CHECK_THROWS_AS(read_geom(dir / "f.geom"), FormatError);
  std::filesystem::remove_all(dir);
}
