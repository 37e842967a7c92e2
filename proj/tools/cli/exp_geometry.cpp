#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>

#include <Eigen/LU>
#include <Eigen/QR>

#include "cli/experiments.hpp"
#include "cli/params.hpp"
#include "divcurl/cartan.hpp"
#include "divcurl/fitting.hpp"
#include "divcurl/gcr.hpp"
#include "divcurl/golden.hpp"
#include "divcurl/procrustes.hpp"

namespace divcurl::cli {

namespace {

// Surfaces with constant Gauss curvature (unit radii).
const std::map<std::string, double> kConstantCurvature = {{"plane", 0.0}, {"cylinder", 0.0}, {"sphere", 1.0}};

void check_surfaces(const Json& list, std::vector<std::string>& out) {
  const auto& known = golden_surface_names();
  std::set<std::string> seen;
  if (list.empty()) out.push_back("surfaces: at least one surface");
  for (const auto& s : list.get<std::vector<std::string>>()) {
    if (std::find(known.begin(), known.end(), s) == known.end()) out.push_back("surfaces: unknown surface '" + s + "'");
    if (!seen.insert(s).second) out.push_back("surfaces: '" + s + "' listed twice");
  }
}

void check_refinement(const Json& list, const std::string& path, int min_cells, std::vector<std::string>& out) {
  const auto r = list.get<std::vector<int>>();
  if (r.size() < 2) out.push_back(path + ": an order needs at least two resolutions");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < min_cells) out.push_back(path + ": every resolution needs at least " + std::to_string(min_cells) + " cells");
    if (i > 0 && r[i] <= r[i - 1]) out.push_back(path + ": must be strictly increasing");
  }
}

double max_interior(const Chart& chart, const Eigen::VectorXd& v) {
  double m = 0.0;
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    if (chart.interior(node, 1)) m = std::max(m, std::abs(v(static_cast<Eigen::Index>(node))));
  return m;
}

struct GcrRow {
  GcrResiduals direct;
  GcrResiduals reformulated;
  DivCurlIdentity identity;
};

GcrRow gcr_row(const std::string& name, int cells) {
  const GoldenSurface s = golden_surface(name, cells);
  const FundamentalData fd = fundamental_data(s.immersion, s.frame);
  const VOmegaFields vo = build_v_omega(fd);
  return {gcr_residuals(s.metric, fd), reformulated_gcr_residuals(vo, fd, s.metric, riemann_curvature(s.metric)),
          divcurl_identity_check(vo, fd)};
}

Experiment gcr_golden() {
  Experiment e;
  e.name = "gcr_golden";
  e.description = "Gauss-Codazzi-Ricci residuals, their V/Omega reformulation and the div-curl identity on golden surfaces";
  e.defaults = {{"surfaces", {"cylinder", "graph_r4", "helicoid", "plane", "sphere"}},
                {"resolutions", {64, 128}},
                {"curvature_resolution", 64},
                {"tolerances",
                 {{"plane", 1e-10},
                  {"order", 1.9},
                  {"exact_floor", 1e-9},
                  {"curvature", 0.01},
                  {"agreement_factor", 10.0},
                  {"agreement_floor", 1e-10},
                  {"identity_order", 0.9},
                  {"identity_floor", 1e-10}}}};
  e.validate = [](const ExperimentConfig& c) {
    std::vector<std::string> out;
    check_surfaces(c.params["surfaces"], out);
    check_refinement(c.params["resolutions"], "resolutions", 8, out);
    if (c.params["curvature_resolution"].get<int>() < 8) out.push_back("curvature_resolution: at least 8 cells");
    check_positive(c.params["tolerances"], "tolerances", out);
    return out;
  };
  e.run = [](const ExperimentConfig& c, ArtifactWriter& w) {
    const Json& tol = c.params["tolerances"];
    const auto res = c.params["resolutions"].get<std::vector<int>>();
    const double ratio = static_cast<double>(res.back()) / res.front();
    Table rows{{"surface", "resolution", "gauss", "codazzi", "ricci", "direct", "reformulated_gauss",
                "reformulated_codazzi", "reformulated_ricci", "reformulated", "identity_b", "identity_normal",
                "expansion_agreement"},
               {}};
    Table orders{{"surface", "quantity", "coarse", "fine", "ratio", "order", "exact"}, {}};
    Table curvature{{"surface", "resolution", "expected", "max_abs_error"}, {}};
    Verdict v;
    for (const auto& name : c.params["surfaces"].get<std::vector<std::string>>()) {
      std::vector<GcrRow> r;
      bool agree = true;
      for (int n : res) {
        r.push_back(gcr_row(name, n));
        const GcrRow& x = r.back();
        rows.add({name, static_cast<long long>(n), x.direct.gauss.sup, x.direct.codazzi.sup, x.direct.ricci.sup,
                  x.direct.max_sup(), x.reformulated.gauss.sup, x.reformulated.codazzi.sup, x.reformulated.ricci.sup,
                  x.reformulated.max_sup(), x.identity.b_family.sup, x.identity.normal_family.sup,
                  x.identity.expansion_agreement});
        const double f = tol["agreement_factor"].get<double>(), floor = tol["agreement_floor"].get<double>();
        agree = agree && residuals_agree(x.direct.gauss.sup, x.reformulated.gauss.sup, f, floor) &&
                residuals_agree(x.direct.codazzi.sup, x.reformulated.codazzi.sup, f, floor) &&
                residuals_agree(x.direct.ricci.sup, x.reformulated.ricci.sup, f, floor);
      }
      v.add("agreement:" + name, agree);

      const double coarse = r.front().direct.max_sup(), fine = r.back().direct.max_sup();
      const double id_coarse = std::max(r.front().identity.b_family.sup, r.front().identity.normal_family.sup);
      const double id_fine = std::max(r.back().identity.b_family.sup, r.back().identity.normal_family.sup);
      if (name == "plane") {
        double worst = 0.0;
        for (const auto& x : r) worst = std::max({worst, x.direct.max_sup(), x.reformulated.max_sup()});
        v.add("plane_residuals", worst <= tol["plane"].get<double>());
        v.add("plane_identity", id_fine <= tol["plane"].get<double>() && id_coarse <= tol["plane"].get<double>());
      } else {
        const OrderFit o = measured_order(coarse, fine, ratio, tol["exact_floor"].get<double>());
        orders.add({name, std::string("gcr"), coarse, fine, ratio, o.order, o.exact});
        v.add("order:" + name, order_at_least(o, tol["order"].get<double>()));
        const OrderFit io = measured_order(id_coarse, id_fine, ratio, tol["identity_floor"].get<double>());
        orders.add({name, std::string("divcurl_identity"), id_coarse, id_fine, ratio, io.order, io.exact});
        v.add("identity_order:" + name, order_at_least(io, tol["identity_order"].get<double>()));
      }

      if (auto it = kConstantCurvature.find(name); it != kConstantCurvature.end()) {
        const int n = c.params["curvature_resolution"].get<int>();
        const GoldenSurface s = golden_surface(name, n);
        const Eigen::VectorXd k = sectional_curvature(riemann_curvature(s.metric), s.metric);
        const double err = max_interior(s.metric.chart(), k.array() - it->second);
        curvature.add({name, static_cast<long long>(n), it->second, err});
        v.add("curvature:" + name, err <= tol["curvature"].get<double>() * std::max(1.0, std::abs(it->second)));
      }
    }
    w.csv("gcr.csv", rows);
    w.csv("orders.csv", orders);
    w.csv("curvature.csv", curvature);
    return v;
  };
  return e;
}

std::optional<SpanningTree> tree_from(const std::string& s) {
  if (s == "comb_last_axis") return SpanningTree::comb_last_axis;
  if (s == "comb_first_axis") return SpanningTree::comb_first_axis;
  return std::nullopt;
}

struct Realization {
  GoldenSurface s;
  FundamentalData fd;
  FramePack fp;
  std::size_t base = 0;
  FrameIntegral fi;
};

Realization realize(const std::string& name, int cells, SpanningTree tree) {
  GoldenSurface s = golden_surface(name, cells);
  FundamentalData fd = fundamental_data(s.immersion, s.frame);
  FramePack fp = connection_forms(s.metric, fd);
  const Chart& ch = fp.chart;
  const std::size_t base = ch.node_index({ch.points(0) / 2, ch.points(1) / 2, 0});
  FrameIntegral fi = solve_pfaff(fp, frame_at(fd, base), base, tree);
  fi = solve_poincare(fp, std::move(fi), s.immersion.point(base), tree);
  return {std::move(s), std::move(fd), std::move(fp), base, std::move(fi)};
}

Eigen::MatrixXd random_orthogonal(int m, std::mt19937_64& rng, bool improper) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  if ((q.determinant() < 0) != improper) q.col(0) *= -1;
  return q;
}

Experiment realization_roundtrip() {
  Experiment e;
  e.name = "realization_roundtrip";
  e.description = "golden surface -> connection forms -> Pfaff and Poincare integration -> rigid alignment to the original";
  e.defaults = {{"surfaces", {"cylinder", "sphere"}},
                {"resolution", 128},
                {"holonomy_resolutions", {32, 64}},
                {"gauge_resolution", 64},
                {"tree", "comb_last_axis"},
                {"tolerances",
                 {{"rms_fraction", 1e-4}, {"gauge", 1e-8}, {"holonomy_order", 2.0}, {"holonomy_floor", 1e-13}}}};
  e.validate = [](const ExperimentConfig& c) {
    std::vector<std::string> out;
    check_surfaces(c.params["surfaces"], out);
    if (c.params["resolution"].get<int>() < 8) out.push_back("resolution: at least 8 cells");
    if (c.params["gauge_resolution"].get<int>() < 8) out.push_back("gauge_resolution: at least 8 cells");
    check_refinement(c.params["holonomy_resolutions"], "holonomy_resolutions", 8, out);
    if (!tree_from(c.params["tree"].get<std::string>())) out.push_back("tree: one of comb_last_axis, comb_first_axis");
    check_positive(c.params["tolerances"], "tolerances", out);
    return out;
  };
  e.run = [](const ExperimentConfig& c, ArtifactWriter& w) {
    const Json& tol = c.params["tolerances"];
    const SpanningTree tree = *tree_from(c.params["tree"].get<std::string>());
    const int n = c.params["resolution"].get<int>();
    const auto hres = c.params["holonomy_resolutions"].get<std::vector<int>>();
    std::mt19937_64 rng(c.seed);

    Table rt{{"surface", "resolution", "rms", "diameter", "rms_fraction", "reflection", "holonomy_defect",
              "closedness_defect", "orthogonality_drift", "projection_correction", "isometry_defect"},
             {}};
    Table hol{{"surface", "resolution", "holonomy_defect", "closedness_defect"}, {}};
    Table gauge{{"surface", "resolution", "improper", "rms", "reflection"}, {}};
    Table orders{{"surface", "coarse", "fine", "ratio", "order", "exact"}, {}};
    Verdict v;
    for (const auto& name : c.params["surfaces"].get<std::vector<std::string>>()) {
      const Realization r = realize(name, n, tree);
      const ImmersionField f = r.fi.immersion();
      const RigidMotion m = rigid_motion_align(f, r.s.immersion);
      const double frac = m.rms / r.s.diameter;
      rt.add({name, static_cast<long long>(n), m.rms, r.s.diameter, frac, m.reflection, r.fi.holonomy_defect,
              r.fi.closedness_defect, r.fi.orthogonality_drift, r.fi.projection_correction,
              isometry_defect(f, r.s.metric).sup});
      v.add("roundtrip:" + name, frac <= tol["rms_fraction"].get<double>() && !m.reflection);

      std::vector<double> h;
      for (int hn : hres) {
        const Realization x = realize(name, hn, tree);
        h.push_back(x.fi.holonomy_defect);
        hol.add({name, static_cast<long long>(hn), x.fi.holonomy_defect, x.fi.closedness_defect});
      }
      const double ratio = static_cast<double>(hres.back()) / hres.front();
      const OrderFit o = measured_order(h.front(), h.back(), ratio, tol["holonomy_floor"].get<double>());
      orders.add({name, h.front(), h.back(), ratio, o.order, o.exact});
      v.add("holonomy_order:" + name, order_at_least(o, tol["holonomy_order"].get<double>()));

      // another initial frame and base point reproduce the surface up to a rigid motion,
      // improper exactly when the initial frame is
      const int gn = c.params["gauge_resolution"].get<int>();
      const Realization g = realize(name, gn, tree);
      bool covariant = true;
      for (bool improper : {false, true}) {
        const Eigen::MatrixXd q = random_orthogonal(g.fp.ambient(), rng, improper);
        std::normal_distribution<double> z;
        Eigen::VectorXd f0(g.fp.ambient());
        for (auto& x : f0) x = z(rng);
        FrameIntegral fi = solve_pfaff(g.fp, frame_at(g.fd, g.base) * q, g.base, tree);
        fi = solve_poincare(g.fp, std::move(fi), f0, tree);
        const RigidMotion gm = rigid_motion_align(fi.immersion(), g.fi.immersion());
        gauge.add({name, static_cast<long long>(gn), improper, gm.rms, gm.reflection});
        covariant = covariant && gm.rms <= tol["gauge"].get<double>() && gm.reflection == improper;
      }
      v.add("gauge:" + name, covariant);
    }
    w.csv("roundtrip.csv", rt);
    w.csv("holonomy.csv", hol);
    w.csv("holonomy_orders.csv", orders);
    w.csv("gauge.csv", gauge);
    return v;
  };
  return e;
}

}  // namespace

void register_geometry_experiments(std::vector<Experiment>& out) {
  out.push_back(gcr_golden());
  out.push_back(realization_roundtrip());
}

}  // namespace divcurl::cli
