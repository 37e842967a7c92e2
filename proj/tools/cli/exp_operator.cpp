#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "cli/experiments.hpp"
#include "cli/params.hpp"
#include "divcurl/error.hpp"
#include "divcurl/grid_matrices.hpp"
#include "divcurl/hodge.hpp"
#include "divcurl/operator_pair.hpp"

namespace divcurl::cli {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b) {
  const SparseMatrix d = a - b;
  return d.nonZeros() ? d.coeffs().cwiseAbs().maxCoeff() : 0.0;
}

std::optional<KernelMode> kernel_mode(const std::string& s) {
  if (s == "automatic") return KernelMode::automatic;
  if (s == "dense") return KernelMode::dense;
  if (s == "iterative") return KernelMode::iterative;
  return std::nullopt;
}

const char* mode_name(KernelMode m) {
  switch (m) {
    case KernelMode::automatic: return "automatic";
    case KernelMode::dense: return "dense";
    case KernelMode::iterative: return "iterative";
  }
  return "?";
}

// Reference for a block of the generalized Laplacian, assembled by probing the cochain-level
// operators (Hodge star based) rather than the sparse matrices. At the end degrees the block
// is the full Hodge Laplacian; in between it is the one composition the pair produces.
SparseMatrix probed_block(const PeriodicGrid& g, int degree, bool y_block) {
  const bool full = y_block ? degree == 0 : degree == g.dim();
  if (full) return assemble_by_probing(g, degree, [](const Cochain& c) { return laplace_beltrami(c); });
  if (y_block)
    return assemble_by_probing(g, degree, [](const Cochain& c) { return codifferential(exterior_derivative(c)); });
  return assemble_by_probing(g, degree, [](const Cochain& c) { return exterior_derivative(codifferential(c)); });
}

Experiment operator_pair() {
  Experiment e;
  e.name = "operator_pair";
  e.description = "grid pair S = delta, T = d: kernel dimension, S T^dagger = 0, generalized Laplacian, coercivity";
  e.defaults = {{"dims", {2, 3}},
                {"resolutions", {4, 8, 16}},
                {"degree", 1},
                {"period", 1.0},
                {"kernel", {{"tol", 1e-8}, {"mode", "automatic"}, {"dense_limit", 2000}}},
                {"identity_resolutions", {8}},
                {"coercivity", {{"max_dim", 2000}, {"probes", 64}}},
                {"tolerances", {{"orthogonality", 1e-12}, {"laplacian", 1e-12}, {"probe_ratio", 1.0}}}};
  e.validate = [](const ExperimentConfig& c) {
    std::vector<std::string> out;
    const Json& p = c.params;
    if (p["dims"].empty()) out.push_back("dims: at least one dimension");
    for (int d : p["dims"].get<std::vector<int>>())
      if (d != 2 && d != 3) out.push_back("dims: dimension must be 2 or 3");
    if (p["resolutions"].empty()) out.push_back("resolutions: at least one resolution");
    for (const char* key : {"resolutions", "identity_resolutions"})
      for (int n : p[key].get<std::vector<int>>())
        if (n < 2) out.push_back(std::string(key) + ": every resolution needs at least 2 cells");
    const int q = p["degree"].get<int>();
    for (int d : p["dims"].get<std::vector<int>>())
      if (q < 1 || q >= d) out.push_back("degree: the pair needs 1 <= degree < dim");
    if (!(p["period"].get<double>() > 0.0)) out.push_back("period: must be positive");
    if (!kernel_mode(p["kernel"]["mode"].get<std::string>()))
      out.push_back("kernel.mode: one of automatic, dense, iterative");
    if (!(p["kernel"]["tol"].get<double>() > 0.0 && p["kernel"]["tol"].get<double>() < 1.0))
      out.push_back("kernel.tol: must lie in (0, 1)");
    if (p["kernel"]["dense_limit"].get<long long>() < 1) out.push_back("kernel.dense_limit: must be positive");
    if (p["coercivity"]["max_dim"].get<long long>() > 5000) out.push_back("coercivity.max_dim: dense solve, at most 5000");
    if (p["coercivity"]["probes"].get<long long>() < 0) out.push_back("coercivity.probes: must be >= 0");
    check_positive(p["tolerances"], "tolerances", out);
    return out;
  };
  e.run = [](const ExperimentConfig& c, ArtifactWriter& w) {
    const Json& p = c.params;
    const int q = p["degree"].get<int>();
    const double length = p["period"].get<double>();
    const double orth_tol = p["tolerances"]["orthogonality"].get<double>();
    const double lap_tol = p["tolerances"]["laplacian"].get<double>();
    const double ratio_tol = p["tolerances"]["probe_ratio"].get<double>();
    KernelOptions ko;
    ko.tol = p["kernel"]["tol"].get<double>();
    ko.mode = *kernel_mode(p["kernel"]["mode"].get<std::string>());
    ko.dense_limit = p["kernel"]["dense_limit"].get<long long>();
    ko.seed = c.seed;
    const long long max_dim = p["coercivity"]["max_dim"].get<long long>();
    const int probes = p["coercivity"]["probes"].get<int>();

    Verdict v;
    Table kernel{{"dim", "resolution", "degree", "dim_h", "kernel_dim", "expected", "threshold",
                  "first_nonzero_singular_value", "range_orthogonality", "ambiguous", "mode", "orthogonality",
                  "coercivity", "probe_ratio"},
                 {}};
    Table identity{{"dim", "resolution", "block", "reference", "max_abs_difference"}, {}};
    for (int dim : p["dims"].get<std::vector<int>>()) {
      for (int n : p["resolutions"].get<std::vector<int>>()) {
        const PeriodicGrid g = PeriodicGrid::cube(dim, n, length);
        const OperatorPair pair = make_grid_pair(g, q);
        const KernelBasis kb = kernel_basis(pair, ko);
        const double orth = check_orthogonality(pair);
        const Eigen::Index next = kb.size();
        const double gap_sv = next < kb.singular_values.size() ? kb.singular_values[next] : nan;
        double coercivity = nan, ratio = nan;
        if (pair.dim_h() <= max_dim) {
          coercivity = coercivity_constant(pair);
          ratio = coercivity_probe_ratio(pair, coercivity, probes, c.seed);
          // C is a supremum, so a probe can only reach it up to roundoff
          v.add("probe_ratio:T" + std::to_string(dim) + "N" + std::to_string(n), ratio <= ratio_tol * (1 + 1e-10));
        }
        const std::string tag = "T" + std::to_string(dim) + "N" + std::to_string(n);
        kernel.add({static_cast<long long>(dim), static_cast<long long>(n), static_cast<long long>(q),
                    static_cast<long long>(pair.dim_h()), static_cast<long long>(kb.size()), binomial(dim, q),
                    kb.threshold, gap_sv, kb.range_orthogonality, kb.ambiguous, std::string(mode_name(kb.mode_used)),
                    orth, coercivity, ratio});
        v.add("kernel_dim:" + tag, kb.size() == binomial(dim, q));
        v.add("kernel_gap:" + tag, !kb.ambiguous);
        v.add("orthogonality:" + tag, orth <= orth_tol);
      }
      for (int n : p["identity_resolutions"].get<std::vector<int>>()) {
        const PeriodicGrid g = PeriodicGrid::cube(dim, n, length);
        const OperatorPair pair = make_grid_pair(g, q);
        const SparseMatrix gl = generalized_laplacian(pair);
        const Eigen::Index ny = pair.dim_y(), nz = pair.dim_z();
        const double dy = max_abs_difference(SparseMatrix(gl.topLeftCorner(ny, ny)), probed_block(g, q - 1, true));
        const double dz = max_abs_difference(SparseMatrix(gl.bottomRightCorner(nz, nz)), probed_block(g, q + 1, false));
        const double cross = max_abs_difference(SparseMatrix(gl.topRightCorner(ny, nz)), SparseMatrix(ny, nz));
        identity.add({static_cast<long long>(dim), static_cast<long long>(n), std::string("SS*"),
                      std::string(q - 1 == 0 ? "hodge_laplacian" : "delta_d"), dy});
        identity.add({static_cast<long long>(dim), static_cast<long long>(n), std::string("TT*"),
                      std::string(q + 1 == dim ? "hodge_laplacian" : "d_delta"), dz});
        identity.add({static_cast<long long>(dim), static_cast<long long>(n), std::string("cross"), std::string("zero"), cross});
        v.add("laplacian_identity:T" + std::to_string(dim) + "N" + std::to_string(n),
              dy <= lap_tol && dz <= lap_tol && cross == 0.0);
      }
    }
    w.csv("kernel.csv", kernel);
    w.csv("laplacian_identity.csv", identity);
    return v;
  };
  return e;
}

Experiment hodge() {
  Experiment e;
  e.name = "hodge_decomposition";
  e.description = "random cochains split into exact + coexact + harmonic; reassembly, orthogonality, harmonicity";
  e.defaults = {{"grid", {{"resolution", {32, 32}}, {"period", {1.0, 1.0}}}},
                {"degree", 1},
                {"samples", 4},
                {"solver", {{"tol", 1e-8}, {"max_iterations", 20000}}},
                {"tolerances", {{"reassembly", 1e-6}, {"orthogonality", 1e-6}, {"laplacian", 1e-6}, {"harmonic", 1e-6}}}};
  e.validate = [](const ExperimentConfig& c) {
    std::vector<std::string> out;
    const Json& p = c.params;
    try {
      const PeriodicGrid g(p["grid"]["resolution"].get<std::vector<int>>(), p["grid"]["period"].get<std::vector<double>>());
      if (p["degree"].get<int>() < 0 || p["degree"].get<int>() > g.dim()) out.push_back("degree: must lie in [0, dim]");
    } catch (const Error& ex) {
      out.push_back(std::string("grid: ") + ex.what());
    }
    if (p["samples"].get<int>() < 1) out.push_back("samples: at least one");
    const double tol = p["solver"]["tol"].get<double>();
    if (!(tol > 0.0 && tol < 1.0)) out.push_back("solver.tol: must lie in (0, 1)");
    if (p["solver"]["max_iterations"].get<int>() < 1) out.push_back("solver.max_iterations: must be positive");
    check_positive(p["tolerances"], "tolerances", out);
    return out;
  };
  e.run = [](const ExperimentConfig& c, ArtifactWriter& w) {
    const Json& p = c.params;
    const PeriodicGrid g(p["grid"]["resolution"].get<std::vector<int>>(), p["grid"]["period"].get<std::vector<double>>());
    const int q = p["degree"].get<int>();
    const Json& tol = p["tolerances"];
    const Eigen::MatrixXd harmonic = harmonic_basis(g, q);
    const Eigen::VectorXd weights = hodge_weights(g, q);

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Table t{{"sample", "norm", "exact_norm", "coexact_norm", "harmonic_norm", "reassembly", "orthogonality",
             "laplacian_residual", "harmonic_projection_defect", "iterations"},
            {}};
    bool reassembly = true, orthogonality = true, laplacian = true, projection = true;
    for (int s = 0; s < p["samples"].get<int>(); ++s) {
      Eigen::VectorXd values(static_cast<Eigen::Index>(g.cell_count(q)));
      for (auto& x : values) x = u(rng);
      const Cochain in(g, q, values);
      const HodgeDecomposition h = hodge_decompose(in, p["solver"]["tol"].get<double>(), p["solver"]["max_iterations"].get<int>());
      // the harmonic part is the Hodge-orthogonal projection onto the parallel forms
      const Eigen::VectorXd coeff = harmonic.transpose() * weights.cwiseProduct(values);
      const double defect = l2_norm(h.harmonic - in.with_values(harmonic * coeff)) / l2_norm(in);
      t.add({static_cast<long long>(s), l2_norm(in), l2_norm(h.exact), l2_norm(h.coexact), l2_norm(h.harmonic),
             h.reassembly_residual, h.orthogonality, h.laplacian_residual, defect, static_cast<long long>(h.iterations)});
      reassembly = reassembly && h.reassembly_residual <= tol["reassembly"].get<double>();
      orthogonality = orthogonality && h.orthogonality <= tol["orthogonality"].get<double>();
      laplacian = laplacian && h.laplacian_residual <= tol["laplacian"].get<double>();
      projection = projection && defect <= tol["harmonic"].get<double>();
    }
    w.csv("hodge.csv", t);
    Verdict v;
    v.add("reassembly", reassembly);
    v.add("orthogonality", orthogonality);
    v.add("harmonic_laplacian", laplacian);
    v.add("harmonic_projection", projection);
    return v;
  };
  return e;
}

}  // namespace

void register_operator_experiments(std::vector<Experiment>& out) {
  out.push_back(operator_pair());
  out.push_back(hodge());
}

}  // namespace divcurl::cli
