#include "divcurl/rigidity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "divcurl/error.hpp"
#include "divcurl/gcr.hpp"
#include "divcurl/procrustes.hpp"

namespace divcurl {

namespace {

constexpr double pi = std::numbers::pi;

Eigen::Index col(std::size_t node) { return static_cast<Eigen::Index>(node); }

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGaussNodes{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                            0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                              0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

std::vector<double> axis_nodes(const Chart& c, int axis) {
  std::vector<double> x(static_cast<std::size_t>(c.points(axis)));
  for (int i = 0; i < c.points(axis); ++i) x[static_cast<std::size_t>(i)] = c.lower(axis) + i * c.spacing(axis);
  return x;
}

double area(const Chart& c) { return (c.upper(0) - c.lower(0)) * (c.upper(1) - c.lower(1)); }

// Fundamental data given intrinsically: E from Gram-Schmidt of the coordinate basis in
// the metric g (E = R^{-1} with g = RᵀR), B and ∇⊥ as given.
FundamentalData intrinsic_data(const MetricField& g, int k, Eigen::MatrixXd second_form, Eigen::MatrixXd normal_conn) {
  const Chart& chart = g.chart();
  const int n = chart.dim();
  FundamentalData fd{chart.with_codim(k), n, k, {}, {}, Eigen::MatrixXd(n * n, col(chart.node_count())),
                     std::move(second_form), std::move(normal_conn)};
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const Eigen::MatrixXd r = g.at(node).llt().matrixU();
    const Eigen::MatrixXd e = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) fd.frame_coefficients(i * n + a, col(node)) = e(i, a);
  }
  return fd;
}

double tangent_angle(const BendingFamily& fam, double eps, double x) {
  return fam.mean_curvature * x + fam.kappa0 * eps * (1.0 - std::cos(x / eps));
}

double max_curvature(const BendingFamily& fam) { return std::max(1.0, fam.kappa0 + std::abs(fam.mean_curvature)); }

}  // namespace

Chart strip_chart(int cells_x, int cells_y, double length, double height) {
  return Chart({cells_x, cells_y}, {0.0, 0.0}, {length, height}, {false, false}, 1);
}

std::vector<std::string> BendingFamily::violations() const {
  std::vector<std::string> out;
  if (chart.dim() != 2 || chart.codim() != 1) out.push_back("chart: bending families live on a 2D chart in codimension 1");
  if (chart.dim() == 2 && (chart.periodic(0) || chart.periodic(1))) out.push_back("chart: the strip is not periodic");
  if (!(kappa0 >= 0.0) || !std::isfinite(kappa0)) out.push_back("kappa0: must be finite and >= 0");
  if (!std::isfinite(mean_curvature) || mean_curvature < 0.0) out.push_back("mean_curvature: must be finite and >= 0");
  if (!(scale > 0.0) || !std::isfinite(scale)) out.push_back("scale: must be positive");
  if (kind != BendingKind::oscillating_cylinder && mean_curvature != 0.0)
    out.push_back("mean_curvature: only oscillating_cylinder bends the limit");
  if (kind == BendingKind::oscillating_cylinder && !(mean_curvature > 0.0))
    out.push_back("mean_curvature: oscillating_cylinder needs a positive mean curvature");
  if (kind != BendingKind::constant && scale != 1.0) out.push_back("scale: only the constant family rescales");
  if (epsilons.empty()) out.push_back("epsilon_schedule: empty");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0)) out.push_back("epsilon_schedule: entries must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) out.push_back("epsilon_schedule: must be strictly decreasing");
  }
  if (!out.empty() || kind == BendingKind::constant) return out;
  if (!(kappa0 * epsilons.front() < 0.5))
    out.push_back("immersivity: kappa0 * max(epsilon) must be below 1/2");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    const double cells = 2 * pi * epsilons[k] / chart.spacing(0);
    if (cells < kMinCellsPerPeriod * (1.0 - 1e-12))
      out.push_back("epsilon resolvability: entry " + std::to_string(k) + " has " + std::to_string(cells) +
                    " cells per fast period (need >= 8)");
  }
  return out;
}

void BendingFamily::validate() const {
  const auto v = violations();
  if (!v.empty()) throw InvalidArgument("bending family: " + v.front());
}

Eigen::MatrixXd integrate_unit_speed_curve(const std::function<double(double)>& theta, const std::vector<double>& nodes) {
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(nodes.size()));
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double mid = 0.5 * (nodes[i] + nodes[i - 1]);
    const double half = 0.5 * (nodes[i] - nodes[i - 1]);
    Eigen::Vector2d cell = Eigen::Vector2d::Zero();
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      const double t = theta(mid + half * kGaussNodes[q]);
      cell += kGaussWeights[q] * Eigen::Vector2d(std::cos(t), std::sin(t));
    }
    sum += half * cell;
    gamma.col(static_cast<Eigen::Index>(i)) = sum;
  }
  return gamma;
}

ImmersionField BendingFamily::member(std::size_t k) const {
  validate();
  if (k >= epsilons.size()) throw InvalidArgument("schedule index out of range");
  if (kind == BendingKind::constant) return limit();
  const double eps = epsilons[k];
  const Eigen::MatrixXd gamma = integrate_unit_speed_curve([&](double x) { return tangent_angle(*this, eps, x); },
                                                           axis_nodes(chart, 0));
  return sample_immersion(chart, [&](const Point& x) {
    const auto i = static_cast<Eigen::Index>(std::lround((x[0] - chart.lower(0)) / chart.spacing(0)));
    return Eigen::VectorXd(Eigen::Vector3d(gamma(0, i), gamma(1, i), x[1]));
  });
}

ImmersionField BendingFamily::limit() const {
  const double kb = mean_curvature;
  return sample_immersion(chart, [&](const Point& x) {
    if (kind != BendingKind::oscillating_cylinder) return Eigen::VectorXd(scale * Eigen::Vector3d(x[0], 0.0, x[1]));
    return Eigen::VectorXd(Eigen::Vector3d(std::sin(kb * x[0]) / kb, (1.0 - std::cos(kb * x[0])) / kb, x[1]));
  });
}

Eigen::MatrixXd BendingFamily::limit_second_form() const {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, col(chart.node_count()));
  b.row(0).setConstant(kind == BendingKind::oscillating_cylinder ? mean_curvature : 0.0);
  return b;
}

MetricField BendingFamily::metric() const { return MetricField::identity(chart); }

BendingFamily corrugation_family(double kappa0, std::vector<double> epsilons, Chart chart) {
  FrameOptions left;
  left.orientation = -1;
  BendingFamily fam{BendingKind::corrugated_strip, kappa0, 0.0, 1.0, std::move(epsilons), std::move(chart), left};
  fam.validate();
  return fam;
}

BendingFamily oscillating_cylinder_family(double kappa0, double mean_curvature, std::vector<double> epsilons,
                                          Chart chart) {
  BendingFamily fam = corrugation_family(kappa0, epsilons, chart);
  fam.kind = BendingKind::oscillating_cylinder;
  fam.mean_curvature = mean_curvature;
  fam.validate();
  return fam;
}

BendingFamily constant_family(double scale, std::vector<double> epsilons, Chart chart) {
  FrameOptions left;
  left.orientation = -1;
  BendingFamily fam{BendingKind::constant, 0.0, 0.0, scale, std::move(epsilons), std::move(chart), left};
  fam.validate();
  return fam;
}

std::vector<TestFunction> rigidity_test_functions(const Chart& chart) {
  const double length = chart.upper(0) - chart.lower(0);
  const double height = chart.upper(1) - chart.lower(1);
  return {
      {"one", [](const Point&) { return 1.0; }},
      {"ramp", [](const Point& x) { return 1.0 + x[0]; }},
      {"cosine", [=](const Point& x) { return std::cos(pi * x[0] / length) * (1.0 + x[1] / height); }},
  };
}

WeakLimit weak_limit_family(const BendingFamily& fam, const std::vector<TestFunction>& tests) {
  fam.validate();
  if (fam.size() < 3) throw InvalidArgument("weak limits need a schedule of at least three entries");
  const Chart& chart = fam.chart;
  const Eigen::VectorXd weights = node_weights(chart);
  const Eigen::MatrixXd b_bar = fam.limit_second_form();
  const MetricField g = fam.metric();

  FundamentalData fd_bar = intrinsic_data(g, 1, b_bar, Eigen::MatrixXd::Zero(2, col(chart.node_count())));
  FramePack w_bar = connection_forms(g, fd_bar);
  WeakLimit out{fam.limit(), std::move(fd_bar), std::move(w_bar), {}, {}};

  std::vector<std::vector<double>> gaps(tests.size());
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const FundamentalData fd = fundamental_data(fam.member(k), fam.frame);
    const Eigen::MatrixXd diff = fd.second_form - b_bar;
    for (std::size_t t = 0; t < tests.size(); ++t) {
      Eigen::VectorXd psi(col(chart.node_count()));
      for (std::size_t node = 0; node < chart.node_count(); ++node)
        psi(col(node)) = weights(col(node)) * tests[t].psi(chart.coordinate(node));
      const double p = (diff * psi).cwiseAbs().maxCoeff();
      out.pairings.push_back({fam.epsilons[k], tests[t].id, p});
      gaps[t].push_back(p);
    }
  }
  const double floor = kPairingFloor * max_curvature(fam) * area(chart);
  for (std::size_t t = 0; t < tests.size(); ++t) out.decay.emplace_back(tests[t].id, fit_order(fam.epsilons, gaps[t], floor));
  return out;
}

const RigidityCheck& RigidityReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw InvalidArgument("no rigidity check named '" + name + "'");
}

RigidityReport rigidity_report(const BendingFamily& fam, const std::vector<TestFunction>& tests,
                               const RigidityTolerances& tol) {
  const WeakLimit lim = weak_limit_family(fam, tests);
  const Chart& chart = fam.chart;
  const Eigen::VectorXd weights = node_weights(chart);
  const MetricField g = fam.metric();
  const double kmax = max_curvature(fam);
  const std::vector<double> thresholds{0.25 * kmax * kmax, 0.5 * kmax * kmax, kmax * kmax, 2 * kmax * kmax};

  RigidityReport r;
  r.pairings = lim.pairings;
  r.decay = lim.decay;
  const Eigen::MatrixXd f_bar = lim.f_bar.points();
  bool hypotheses = true;
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const double eps = fam.epsilons[k];
    const ImmersionField f = fam.member(k);
    const FundamentalData fd = fundamental_data(f, fam.frame);
    // the member's own induced metric: each f^ε is a genuine immersion for it
    const MetricField gi = induced_metric(f);
    MemberRow row;
    row.epsilon = eps;
    row.isometry_defect = isometry_defect(f, g).sup;
    const Eigen::VectorXd b2 = fd.second_form.colwise().squaredNorm().transpose();
    row.b_l2 = std::sqrt(b2.dot(weights));
    row.b_sup = std::sqrt(b2.maxCoeff());
    row.b_l2_bound = fam.kappa0 * std::sqrt(area(chart) / 2) * (1 + 1e-2) + fam.mean_curvature * std::sqrt(area(chart));
    row.c0_distance = (f.points() - f_bar).colwise().norm().maxCoeff();
    row.c0_bound = 2 * fam.kappa0 * eps * (chart.upper(0) - chart.lower(0));
    row.gcr_residual = gcr_residuals(gi, fd).max_sup();
    row.structural_residual = structural_residuals(connection_forms(gi, fd)).second.sup;
    for (double m : thresholds) {
      double tail = 0.0;
      for (Eigen::Index node = 0; node < b2.size(); ++node)
        if (b2(node) > m) tail += weights(node) * b2(node);
      row.tails.emplace_back(m, tail);
    }
    hypotheses = hypotheses && row.isometry_defect <= tol.isometry && row.b_l2 <= row.b_l2_bound;
    r.members.push_back(std::move(row));
  }

  r.limit_isometry_defect = isometry_defect(lim.f_bar, g).sup;
  r.limit_gcr_residual = gcr_residuals(g, lim.fd_bar).max_sup();
  r.limit_structural_residual = structural_residuals(lim.w_bar).second.sup;

  double member_structural = 0.0;
  double top_tail = 0.0;
  for (const auto& m : r.members) {
    member_structural = std::max(member_structural, m.structural_residual);
    top_tail = std::max(top_tail, m.tails.back().second);
  }
  r.checks = {
      {"a", "isometry defect of the limit immersion", r.limit_isometry_defect, tol.isometry,
       r.limit_isometry_defect <= tol.isometry},
      {"b", "Gauss-Codazzi-Ricci residual of the limit data", r.limit_gcr_residual, tol.gcr,
       r.limit_gcr_residual <= tol.gcr},
      {"c", "structural residual |dW - W^W| of the limit", r.limit_structural_residual, tol.structural,
       r.limit_structural_residual <= tol.structural},
      {"d", "max structural residual over the members", member_structural, tol.member_structural,
       member_structural <= tol.member_structural},
      {"e", "max tail of |B|^2 above twice the squared curvature bound", top_tail, 1e-12 * area(chart),
       top_tail <= 1e-12 * area(chart)},
  };
  r.decay_pass = std::all_of(r.decay.begin(), r.decay.end(),
                             [&](const auto& d) { return order_at_least(d.second, tol.decay_order); });
  r.hypotheses_pass = hypotheses && r.check("d").pass && r.check("e").pass;
  r.verdict = r.check("a").pass && r.check("b").pass && r.check("c").pass;
  return r;
}

}  // namespace divcurl
