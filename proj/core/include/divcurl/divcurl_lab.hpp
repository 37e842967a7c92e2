#pragma once

// Div-curl convergence experiments on oscillatory families and their diagnostics.
//
// H^{-1} norms are proxied by ||(Δ + I)^{-1/2} op c||; Theorem-level W^{-1,1} compactness has
// no finite proxy here, only the equi-integrability side is measured.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "divcurl/fitting.hpp"
#include "divcurl/oscillatory.hpp"

namespace divcurl {

struct TestFunction {
  std::string id;
  std::function<double(const Point&)> psi;
};

/// ψ ≡ 1, the ramp ψ = x₁ / L₁ (discontinuous across the wrap, O(ε) gaps) and a smooth
/// compactly supported bump centred in the box.
std::vector<TestFunction> default_test_functions(const std::vector<double>& period);

enum class DiagnosticOp { d, delta };

struct CompactnessRow {
  double epsilon = 0.0;
  double proxy = 0.0;  // ||(Δ + I)^{-1/2} op c||
  double l2 = 0.0;     // ||op c||
};

/// Per ε: H^{-1} proxy (5-step Lanczos) and raw L² norm of d c^ε or δ c^ε.
std::vector<CompactnessRow> compactness_diagnostic(const OscillatoryFamily& fam, DiagnosticOp which);

/// Same for a single cochain.
CompactnessRow compactness_of(const Cochain& c, DiagnosticOp which, double epsilon = 0.0);

/// (M, ∫_{|<ω,τ>| > M} |<ω,τ>| dV) on the node-reconstructed product, per threshold.
std::vector<std::pair<double, double>> equiintegrability_diagnostic(const Cochain& omega, const Cochain& tau,
                                                                    const std::vector<double>& thresholds);

struct ConvergenceRow {
  double epsilon = 0.0;
  std::string test_id;
  double pairing = 0.0;
  double limit = 0.0;
  double gap = 0.0;
  double dproxy = 0.0;      // of dω^ε
  double deltaproxy = 0.0;  // of δτ^ε
};

struct TestSummary {
  std::string id;
  double limit = 0.0;
  OrderFit order;
  double final_gap = 0.0;
};

struct TailRow {
  double epsilon = 0.0;
  double mean_abs = 0.0;  // mean of |<ω,τ>|
  std::vector<std::pair<double, double>> tails;  // thresholds {1,2,4,8} x mean_abs
};

struct ConvergenceReport {
  std::vector<double> epsilons;
  std::vector<ConvergenceRow> rows;  // ε-major, tests in the given order
  std::vector<TestSummary> tests;
  std::vector<CompactnessRow> d_omega;
  std::vector<CompactnessRow> delta_tau;
  std::vector<TailRow> tails;
  bool d_proxy_decays = false;
  bool delta_proxy_decays = false;

  const TestSummary& test(const std::string& id) const;
};

/// Pairings ∫<ω^ε, τ^ε>ψ against ∫<ω̄, τ̄>ψ per ε and test function, with fitted orders.
ConvergenceReport divcurl_experiment(const OscillatoryFamily& omega, const OscillatoryFamily& tau,
                                     const std::vector<TestFunction>& tests);

/// A proxy sequence "decays" when its last entry is below half the first and its fitted
/// order against ε is at least 1/2. Sequences identically zero count as decaying.
bool proxy_decays(const std::vector<CompactnessRow>& rows);

using HeaderFields = std::vector<std::pair<std::string, std::string>>;

/// CSV columns epsilon,test_id,pairing,gap,dproxy,deltaproxy,order; header fields become
/// leading "# key=value" comment lines.
void write_convergence_csv(std::ostream& out, const ConvergenceReport& report, const HeaderFields& header = {});
void write_convergence_json(std::ostream& out, const ConvergenceReport& report, const HeaderFields& header = {});

}  // namespace divcurl
