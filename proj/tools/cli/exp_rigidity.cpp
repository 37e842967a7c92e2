#include <optional>

#include "cli/experiments.hpp"
#include "cli/params.hpp"
#include "divcurl/error.hpp"
#include "divcurl/rigidity.hpp"

namespace divcurl::cli {

namespace {

std::optional<BendingKind> kind_from(const std::string& s) {
  if (s == "corrugated_strip") return BendingKind::corrugated_strip;
  if (s == "oscillating_cylinder") return BendingKind::oscillating_cylinder;
  if (s == "constant") return BendingKind::constant;
  return std::nullopt;
}

// Built without the factories' validate() so that every violation is reported, not the first.
std::optional<BendingFamily> family_from(const Json& p, std::vector<std::string>* violations) {
  const Json& f = p["family"];
  const Json& ch = p["chart"];
  const auto kind = kind_from(f["kind"].get<std::string>());
  if (!kind) {
    if (violations) violations->push_back("family.kind: one of corrugated_strip, oscillating_cylinder, constant");
    return std::nullopt;
  }
  const auto cells = ch["cells"].get<std::vector<int>>();
  const double length = ch["length"].get<double>(), height = ch["height"].get<double>();
  bool chart_ok = cells.size() == 2 && length > 0.0 && height > 0.0;
  for (int n : cells) chart_ok = chart_ok && n >= 4;
  if (!chart_ok) {
    if (violations) violations->push_back("chart: two cell counts >= 4 and positive length and height");
    return std::nullopt;
  }
  FrameOptions left;
  left.orientation = -1;
  BendingFamily fam{*kind,
                    f["kappa0"].get<double>(),
                    f["mean_curvature"].get<double>(),
                    f["scale"].get<double>(),
                    schedule_from(p["schedule"]),
                    strip_chart(cells[0], cells[1], length, height),
                    left};
  if (violations) {
    for (const auto& v : fam.violations()) {
      const bool sched = v.rfind("epsilon", 0) == 0 || v.rfind("immersivity", 0) == 0;
      const bool chart = v.rfind("chart", 0) == 0;
      violations->push_back(sched ? "schedule: " + v : chart ? v : "family." + v);
    }
  }
  return fam;
}

Json check_json(const RigidityCheck& c) {
  return {{"name", c.name}, {"description", c.description}, {"value", number(c.value)},
          {"tolerance", number(c.tolerance)}, {"pass", c.pass}};
}

Experiment rigidity() {
  Experiment e;
  e.name = "rigidity_corrugation";
  e.description = "oscillating isometric bendings of a strip: the weak limit is an isometric immersion solving GCR";
  e.defaults = {
      {"family", {{"kind", "corrugated_strip"}, {"kappa0", 1.0}, {"mean_curvature", 0.0}, {"scale", 1.0}}},
      {"chart", {{"cells", {2048, 64}}, {"length", 1.0}, {"height", 0.125}}},
      {"schedule", {{"first", 3}, {"last", 6}, {"epsilons", Json::array()}}},
      {"tolerances",
       {{"isometry", 1e-8}, {"gcr", 1e-10}, {"structural", 1e-10}, {"member_structural", 1e-6}, {"decay_order", 0.9}}}};
  e.validate = [](const ExperimentConfig& c) {
    std::vector<std::string> out;
    check_schedule(c.params["schedule"], "schedule", out);
    if (!out.empty()) return out;
    family_from(c.params, &out);
    if (schedule_from(c.params["schedule"]).size() < 3) out.push_back("schedule: weak limits need at least three entries");
    check_positive(c.params["tolerances"], "tolerances", out);
    return out;
  };
  e.run = [](const ExperimentConfig& c, ArtifactWriter& w) {
    const BendingFamily fam = *family_from(c.params, nullptr);
    fam.validate();
    const Json& t = c.params["tolerances"];
    RigidityTolerances tol;
    tol.isometry = t["isometry"].get<double>();
    tol.gcr = t["gcr"].get<double>();
    tol.structural = t["structural"].get<double>();
    tol.member_structural = t["member_structural"].get<double>();
    tol.decay_order = t["decay_order"].get<double>();
    const RigidityReport r = rigidity_report(fam, rigidity_test_functions(fam.chart), tol);

    Table members{{"epsilon", "isometry_defect", "b_l2", "b_l2_bound", "b_sup", "c0_distance", "c0_bound",
                   "gcr_residual", "structural_residual"},
                  {}};
    Table tails{{"epsilon", "threshold", "tail"}, {}};
    for (const auto& m : r.members) {
      members.add({m.epsilon, m.isometry_defect, m.b_l2, m.b_l2_bound, m.b_sup, m.c0_distance, m.c0_bound,
                   m.gcr_residual, m.structural_residual});
      for (const auto& [threshold, tail] : m.tails) tails.add({m.epsilon, threshold, tail});
    }
    Table pairings{{"epsilon", "test_id", "pairing"}, {}};
    for (const auto& p : r.pairings) pairings.add({p.epsilon, p.test_id, p.pairing});
    w.csv("members.csv", members);
    w.csv("pairings.csv", pairings);
    w.csv("tails.csv", tails);

    Json checks = Json::array();
    for (const auto& ck : r.checks) checks.push_back(check_json(ck));
    Json decay = Json::array();
    for (const auto& [id, fit] : r.decay)
      decay.push_back({{"test_id", id}, {"order", number(fit.order)}, {"exact", fit.exact}, {"points_used", fit.points_used}});
    w.json("rigidity.json", {{"family", c.params["family"]},
                             {"limit",
                              {{"isometry_defect", number(r.limit_isometry_defect)},
                               {"gcr_residual", number(r.limit_gcr_residual)},
                               {"structural_residual", number(r.limit_structural_residual)},
                               {"checks", checks},
                               {"verdict", r.verdict}}},
                             {"decay", decay},
                             {"decay_pass", r.decay_pass},
                             {"hypotheses_pass", r.hypotheses_pass}});
    Verdict v;
    v.add("limit_verdict", r.verdict);
    v.add("decay", r.decay_pass);
    v.add("hypotheses", r.hypotheses_pass);
    return v;
  };
  return e;
}

}  // namespace

void register_rigidity_experiments(std::vector<Experiment>& out) { out.push_back(rigidity()); }

}  // namespace divcurl::cli
