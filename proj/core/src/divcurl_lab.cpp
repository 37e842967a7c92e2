#include "divcurl/divcurl_lab.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "json.hpp"

#include "divcurl/error.hpp"
#include "divcurl/solvers.hpp"

namespace divcurl {

std::vector<TestFunction> default_test_functions(const std::vector<double>& period) {
  const double l0 = period.at(0);
  const double l1 = period.at(1);
  std::vector<TestFunction> tests;
  tests.push_back({"one", [](const Point&) { return 1.0; }});
  tests.push_back({"ramp", [l0](const Point& x) { return x[0] / l0; }});
  tests.push_back({"bump", [l0, l1](const Point& x) {
                     const double u = 2.0 * x[0] / l0 - 1.0, v = 2.0 * x[1] / l1 - 1.0;
                     const double r2 = (u * u + v * v) / 0.64;
                     return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
                   }});
  return tests;
}

CompactnessRow compactness_of(const Cochain& c, DiagnosticOp which, double epsilon) {
  CompactnessRow row;
  row.epsilon = epsilon;
  const int q = c.degree();
  if (which == DiagnosticOp::d && q >= c.grid().dim()) throw DegreeError("d is not defined on top-degree cochains");
  if (which == DiagnosticOp::delta && q == 0) throw DegreeError("δ is not defined on 0-cochains");
  const Cochain image = which == DiagnosticOp::d ? exterior_derivative(c) : codifferential(c);
  row.l2 = l2_norm(image);
  const Eigen::VectorXd w = hodge_weights(image.grid(), image.degree());
  const LinearMap shifted_laplacian = [&](const Eigen::VectorXd& x) {
    const Cochain xc = image.with_values(x);
    return Eigen::VectorXd(laplace_beltrami(xc).values() + x);
  };
  row.proxy = lanczos_inverse_sqrt_norm(shifted_laplacian, image.values(), w, 5);
  return row;
}

std::vector<CompactnessRow> compactness_diagnostic(const OscillatoryFamily& fam, DiagnosticOp which) {
  fam.validate();
  std::vector<CompactnessRow> rows;
  for (std::size_t k = 0; k < fam.epsilons.size(); ++k)
    rows.push_back(compactness_of(gen_oscillatory_form(fam, k), which, fam.epsilons[k]));
  return rows;
}

std::vector<std::pair<double, double>> equiintegrability_diagnostic(const Cochain& omega, const Cochain& tau,
                                                                    const std::vector<double>& thresholds) {
  const Eigen::VectorXd p = node_inner_product(omega, tau);
  const double cell = omega.grid().extent(omega.grid().full_mask());
  std::vector<std::pair<double, double>> out;
  for (double m : thresholds) {
    double tail = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (std::abs(p[i]) > m) tail += std::abs(p[i]);
    out.emplace_back(m, tail * cell);
  }
  return out;
}

bool proxy_decays(const std::vector<CompactnessRow>& rows) {
  if (rows.empty()) return true;
  double largest = 0.0;
  for (const auto& r : rows) largest = std::max(largest, r.proxy);
  if (largest == 0.0) return true;
  std::vector<double> e, v;
  for (const auto& r : rows) {
    e.push_back(r.epsilon);
    v.push_back(r.proxy);
  }
  const OrderFit fit = fit_order(e, v, 1e-12 * largest);
  return rows.back().proxy < 0.5 * rows.front().proxy && order_at_least(fit, 0.5);
}

const TestSummary& ConvergenceReport::test(const std::string& id) const {
  for (const auto& t : tests)
    if (t.id == id) return t;
  throw InvalidArgument("no test function '" + id + "' in report");
}

ConvergenceReport divcurl_experiment(const OscillatoryFamily& omega, const OscillatoryFamily& tau,
                                     const std::vector<TestFunction>& tests) {
  omega.validate();
  tau.validate();
  if (omega.epsilons != tau.epsilons) throw InvalidArgument("div-curl experiment: schedules differ");
  if (omega.resolution != tau.resolution || omega.period != tau.period)
    throw InvalidArgument("div-curl experiment: families live on different grids");
  if (omega.degree != tau.degree) throw InvalidArgument("div-curl experiment: degrees differ");
  if (tests.empty()) throw InvalidArgument("div-curl experiment: no test functions");

  const PeriodicGrid grid = omega.grid();
  std::vector<Cochain> psi;
  for (const auto& t : tests) psi.push_back(sample_nodes(grid, t.psi));

  ConvergenceReport report;
  report.epsilons = omega.epsilons;
  const Cochain omega_bar = weak_limit(omega);
  const Cochain tau_bar = weak_limit(tau);
  std::vector<double> limits;
  for (const auto& p : psi) limits.push_back(pair_with_test(omega_bar, tau_bar, p));

  const int q = omega.degree;
  const bool has_d = q < grid.dim();
  const bool has_delta = q > 0;
  std::vector<std::vector<double>> gaps(tests.size());
  std::vector<double> scale(tests.size(), 0.0);
  for (std::size_t i = 0; i < tests.size(); ++i) scale[i] = std::abs(limits[i]);

  for (std::size_t k = 0; k < omega.epsilons.size(); ++k) {
    const double eps = omega.epsilons[k];
    const Cochain w = gen_oscillatory_form(omega, k);
    const Cochain t = gen_oscillatory_form(tau, k);
    const CompactnessRow dw = has_d ? compactness_of(w, DiagnosticOp::d, eps) : CompactnessRow{eps, 0.0, 0.0};
    const CompactnessRow dt = has_delta ? compactness_of(t, DiagnosticOp::delta, eps) : CompactnessRow{eps, 0.0, 0.0};
    report.d_omega.push_back(dw);
    report.delta_tau.push_back(dt);

    const Eigen::VectorXd prod = node_inner_product(w, t);
    const double cell = grid.extent(grid.full_mask());
    for (std::size_t i = 0; i < tests.size(); ++i) {
      ConvergenceRow row;
      row.epsilon = eps;
      row.test_id = tests[i].id;
      row.pairing = prod.dot(psi[i].values()) * cell;
      row.limit = limits[i];
      row.gap = std::abs(row.pairing - row.limit);
      row.dproxy = dw.proxy;
      row.deltaproxy = dt.proxy;
      gaps[i].push_back(row.gap);
      scale[i] = std::max(scale[i], std::abs(row.pairing));
      report.rows.push_back(row);
    }

    TailRow tail;
    tail.epsilon = eps;
    tail.mean_abs = prod.cwiseAbs().mean();
    std::vector<double> thresholds;
    for (double f : {1.0, 2.0, 4.0, 8.0}) thresholds.push_back(f * tail.mean_abs);
    tail.tails = equiintegrability_diagnostic(w, t, thresholds);
    report.tails.push_back(std::move(tail));
  }

  for (std::size_t i = 0; i < tests.size(); ++i) {
    TestSummary s;
    s.id = tests[i].id;
    s.limit = limits[i];
    s.order = fit_order(omega.epsilons, gaps[i], 1e-12 * std::max(scale[i], 1e-300));
    s.final_gap = gaps[i].back();
    report.tests.push_back(s);
  }
  report.d_proxy_decays = proxy_decays(report.d_omega);
  report.delta_proxy_decays = proxy_decays(report.delta_tau);
  return report;
}

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json order_json(const OrderFit& f) {
  nlohmann::ordered_json j;
  j["order"] = f.exact ? nlohmann::ordered_json("exact") : nlohmann::ordered_json(f.order);
  j["exact"] = f.exact;
  j["points_used"] = f.points_used;
  return j;
}

}  // namespace

void write_convergence_csv(std::ostream& out, const ConvergenceReport& report, const HeaderFields& header) {
  for (const auto& [k, v] : header) out << "# " << k << "=" << v << "\n";
  out << "epsilon,test_id,pairing,gap,dproxy,deltaproxy,order\n";
  for (const auto& r : report.rows) {
    const OrderFit& f = report.test(r.test_id).order;
    out << fmt(r.epsilon) << ',' << r.test_id << ',' << fmt(r.pairing) << ',' << fmt(r.gap) << ',' << fmt(r.dproxy)
        << ',' << fmt(r.deltaproxy) << ',' << (f.exact ? std::string("exact") : fmt(f.order)) << '\n';
  }
}

void write_convergence_json(std::ostream& out, const ConvergenceReport& report, const HeaderFields& header) {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : header) j[k] = v;
  j["note"] =
      "H^-1 norms are proxied by ||(Lap + I)^(-1/2) op c|| (5-step Lanczos); W^-1,1 compactness has no finite proxy, "
      "only equi-integrability tails are reported";
  j["epsilons"] = report.epsilons;
  auto& tests = j["tests"] = nlohmann::ordered_json::array();
  for (const auto& t : report.tests) {
    nlohmann::ordered_json e;
    e["id"] = t.id;
    e["limit"] = t.limit;
    e["final_gap"] = t.final_gap;
    e["fit"] = order_json(t.order);
    tests.push_back(e);
  }
  auto proxies = [](const std::vector<CompactnessRow>& rows) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const auto& r : rows) a.push_back({{"epsilon", r.epsilon}, {"proxy", r.proxy}, {"l2", r.l2}});
    return a;
  };
  j["d_omega"] = proxies(report.d_omega);
  j["delta_tau"] = proxies(report.delta_tau);
  j["d_proxy_decays"] = report.d_proxy_decays;
  j["delta_proxy_decays"] = report.delta_proxy_decays;
  auto& tails = j["equiintegrability"] = nlohmann::ordered_json::array();
  for (const auto& t : report.tails) {
    nlohmann::ordered_json e;
    e["epsilon"] = t.epsilon;
    e["mean_abs"] = t.mean_abs;
    e["tails"] = nlohmann::ordered_json::array();
    for (const auto& [m, mass] : t.tails) e["tails"].push_back({{"threshold", m}, {"tail", mass}});
    tails.push_back(e);
  }
  out << j.dump(2) << "\n";
}

}  // namespace divcurl
