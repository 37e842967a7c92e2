#include <cmath>
#include <sstream>

#include "cli/experiments.hpp"
#include "cli/params.hpp"
#include "divcurl/divcurl_lab.hpp"
#include "divcurl/error.hpp"

namespace divcurl::cli {

namespace {

Json grid_defaults() { return {{"resolution", {1024, 1024}}, {"period", {1.0, 1.0}}}; }

Json family_defaults(const std::string& fast, int direction) {
  return {{"fast", fast}, {"slow", "one"}, {"direction", direction}, {"degree", 1}, {"axes", {0}},
          {"amplitude_power", 0.0}};
}

Json schedule_defaults() { return {{"first", 3}, {"last", 7}, {"epsilons", Json::array()}}; }

// Throws InvalidArgument for unknown profile names.
OscillatoryFamily family_from(const Json& grid, const Json& f, std::vector<double> eps) {
  OscillatoryFamily fam;
  fam.resolution = grid.at("resolution").get<std::vector<int>>();
  fam.period = grid.at("period").get<std::vector<double>>();
  fam.fast = Profile::named(f.at("fast").get<std::string>());
  fam.slow = SlowProfile::named(f.at("slow").get<std::string>());
  fam.direction = f.at("direction").get<int>();
  fam.degree = f.at("degree").get<int>();
  fam.axis_set = 0;
  for (int a : f.at("axes").get<std::vector<int>>()) fam.axis_set |= (a >= 0 && a < 31) ? (1u << a) : (1u << 31);
  fam.amplitude_power = f.at("amplitude_power").get<double>();
  fam.epsilons = std::move(eps);
  return fam;
}

void check_family(const ExperimentConfig& c, const std::string& key, std::vector<std::string>& out) {
  try {
    const OscillatoryFamily fam = family_from(c.params["grid"], c.params[key], schedule_from(c.params["schedule"]));
    for (const auto& v : fam.violations()) {
      // schedule rules belong to the schedule field, the rest to the family or the grid
      const bool sched = v.rfind("epsilon", 0) == 0;
      const bool grid = v.rfind("resolution", 0) == 0 || v.rfind("period", 0) == 0;
      out.push_back((sched ? std::string("schedule") : grid ? std::string("grid") : key) + ": " + v);
    }
  } catch (const InvalidArgument& e) {
    out.push_back(key + ": " + e.what());
  }
}

std::vector<TestFunction> select_tests(const ExperimentConfig& c, std::vector<std::string>* violations) {
  const auto all = default_test_functions(c.params["grid"]["period"].get<std::vector<double>>());
  std::vector<TestFunction> out;
  for (const auto& id : c.params["tests"].get<std::vector<std::string>>()) {
    bool found = false;
    for (const auto& t : all)
      if (t.id == id) {
        out.push_back(t);
        found = true;
      }
    if (!found && violations) violations->push_back("tests: unknown test function '" + id + "' (one, ramp, bump)");
  }
  if (out.empty() && violations && c.params["tests"].empty()) violations->push_back("tests: at least one test function");
  return out;
}

void write_report(ArtifactWriter& w, const ConvergenceReport& r) {
  std::ostringstream csv, json;
  write_convergence_csv(csv, r, w.header());
  write_convergence_json(json, r, w.header());
  w.text("convergence.csv", csv.str());
  w.text("summary.json", json.str());
}

// ∫ v² ψ dV by the periodic node rule, the predicted weak limit of ω^ε·τ^ε per unit mean square.
double slow_square_integral(const OscillatoryFamily& fam, const TestFunction& t) {
  const PeriodicGrid g = fam.grid();
  double cell = 1.0;
  for (int a = 0; a < g.dim(); ++a) cell *= g.spacing(a);
  double s = 0.0;
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    const Point x = g.node_position(node);
    const double v = fam.slow.v(x);
    s += v * v * t.psi(x);
  }
  return s * cell;
}

Experiment positive() {
  Experiment e;
  e.name = "divcurl_positive";
  e.description = "closed x co-closed separated-variable pair: pairings converge to the product of weak limits";
  e.defaults = {{"grid", grid_defaults()},
                {"schedule", schedule_defaults()},
                {"omega", family_defaults("1+sin", 0)},
                {"tau", family_defaults("1+cos", 1)},
                {"tests", {"one", "ramp", "bump"}},
                {"tolerances", {{"decay_order", 0.9}, {"final_gap_fraction", 0.01}}}};
  e.validate = [](const ExperimentConfig& c) {
    std::vector<std::string> out;
    check_schedule(c.params["schedule"], "schedule", out);
    check_family(c, "omega", out);
    check_family(c, "tau", out);
    select_tests(c, &out);
    check_positive(c.params["tolerances"], "tolerances", out);
    return out;
  };
  e.run = [](const ExperimentConfig& c, ArtifactWriter& w) {
    const auto eps = schedule_from(c.params["schedule"]);
    const OscillatoryFamily omega = family_from(c.params["grid"], c.params["omega"], eps);
    const OscillatoryFamily tau = family_from(c.params["grid"], c.params["tau"], eps);
    const ConvergenceReport r = divcurl_experiment(omega, tau, select_tests(c, nullptr));
    write_report(w, r);

    const double order = c.params["tolerances"]["decay_order"].get<double>();
    const double frac = c.params["tolerances"]["final_gap_fraction"].get<double>();
    Verdict v;
    v.add("d_proxy_decays", r.d_proxy_decays);
    v.add("delta_proxy_decays", r.delta_proxy_decays);
    for (const auto& t : r.tests) {
      v.add("decay_order:" + t.id, order_at_least(t.order, order));
      if (t.limit != 0.0) v.add("final_gap:" + t.id, t.final_gap <= frac * std::abs(t.limit));
    }
    return v;
  };
  return e;
}

Experiment negative() {
  Experiment e;
  e.name = "divcurl_negative";
  e.description = "omega = tau = s(x1/eps) dx1: the pairing converges to mean(s^2) while the limits pair to mean(s)^2";
  Json fam = family_defaults("sin", 0);
  e.defaults = {{"grid", grid_defaults()},
                {"schedule", schedule_defaults()},
                {"family", fam},
                {"tests", {"one"}},
                {"tolerances", {{"variance_fraction", 0.02}, {"limit_pairing", 1e-12}}}};
  e.validate = [](const ExperimentConfig& c) {
    std::vector<std::string> out;
    check_schedule(c.params["schedule"], "schedule", out);
    check_family(c, "family", out);
    if (out.empty()) {
      const Profile p = Profile::named(c.params["family"]["fast"].get<std::string>());
      if (!(p.mean_square - p.mean * p.mean > 0.0))
        out.push_back("family.fast: the negative control needs a non-constant profile (mean(s^2) > mean(s)^2)");
    }
    select_tests(c, &out);
    check_positive(c.params["tolerances"], "tolerances", out);
    return out;
  };
  e.run = [](const ExperimentConfig& c, ArtifactWriter& w) {
    const OscillatoryFamily s = family_from(c.params["grid"], c.params["family"], schedule_from(c.params["schedule"]));
    const auto tests = select_tests(c, nullptr);
    const ConvergenceReport r = divcurl_experiment(s, s, tests);
    write_report(w, r);

    const double frac = c.params["tolerances"]["variance_fraction"].get<double>();
    const double abs_tol = c.params["tolerances"]["limit_pairing"].get<double>();
    const double variance = s.fast.mean_square - s.fast.mean * s.fast.mean;
    const double mean_sq = s.fast.mean * s.fast.mean;
    const double last = s.epsilons.back();
    bool gap_ok = true, limit_ok = true;
    for (const auto& t : tests) {
      const double weight = slow_square_integral(s, t);
      for (const auto& row : r.rows)
        if (row.epsilon == last && row.test_id == t.id)
          gap_ok = gap_ok && std::abs(row.gap - variance * weight) <= frac * std::abs(variance * weight);
      // the module integrates cells, the prediction uses the node rule: allow their O(h) gap
      limit_ok = limit_ok && std::abs(r.test(t.id).limit - mean_sq * weight) <= abs_tol + 1e-3 * std::abs(mean_sq * weight);
    }
    Verdict v;
    v.add("gap_matches_variance", gap_ok);
    v.add("limit_pairing", limit_ok);
    v.add("d_proxy_decays", r.d_proxy_decays);
    v.add("delta_proxy_nondecaying", !r.delta_proxy_decays);
    return v;
  };
  return e;
}

}  // namespace

void register_divcurl_experiments(std::vector<Experiment>& out) {
  out.push_back(positive());
  out.push_back(negative());
}

}  // namespace divcurl::cli
