#pragma once

// Separated-variable oscillatory families v(x) φ(x_dir / ε) dx_S on a periodic grid.

#include <functional>
#include <string>
#include <vector>

#include "divcurl/grid.hpp"

namespace divcurl {

/// Periodic fast profile φ with its period in the fast variable and its first two moments.
struct Profile {
  std::string name;
  std::function<double(double)> f;
  double period = 1.0;
  double mean = 0.0;
  double mean_square = 0.0;
  bool flat = false;  // no oscillation: exempt from the resolvability rule

  static Profile sine();           // sin t, period 2π
  static Profile cosine();         // cos t
  static Profile one_plus_sine();  // 1 + sin t
  static Profile one_plus_cosine();
  static Profile sine_squared();   // sin^2 t
  static Profile constant(double c);
  /// Periodic piecewise-linear interpolation of samples at t = j / n, period 1.
  static Profile from_samples(std::vector<double> samples);
  /// Built-in profiles by name: sin, cos, 1+sin, 1+cos, sin^2, one.
  static Profile named(const std::string& name);
};

struct SlowProfile {
  std::string name;
  std::function<double(const Point&)> v;

  static SlowProfile one();
  static SlowProfile named(const std::string& name);  // one, cos2pix2 (1 + 0.5 cos 2πx₂), sin2pix1x2
};

struct OscillatoryFamily {
  std::vector<int> resolution;
  std::vector<double> period;
  SlowProfile slow = SlowProfile::one();
  Profile fast = Profile::sine();
  int direction = 0;
  std::vector<double> epsilons;  // strictly decreasing
  int degree = 1;
  AxisMask axis_set = 0b01;
  double amplitude_power = 0.0;  // multiplies the member by ε^amplitude_power

  PeriodicGrid grid() const { return PeriodicGrid(resolution, period); }
  /// Grid cells per fast period φ.period · ε_k along `direction`.
  double cells_per_period(std::size_t k) const;
  /// Every broken invariant as "field: rule" text; empty when valid.
  std::vector<std::string> violations() const;
  /// Throws InvalidArgument carrying the first violation.
  void validate() const;
};

inline constexpr double kMinCellsPerPeriod = 8.0;

/// Cell integrals of ε^p v(x) φ(x_dir / ε_k) on the family's axis-set cells, 4-point Gauss per axis.
Cochain gen_oscillatory_form(const OscillatoryFamily& fam, std::size_t k);

/// Cell integrals of v(x) mean(φ) (times ε^p's limit, zero when p > 0).
Cochain weak_limit(const OscillatoryFamily& fam);

/// Cross-check estimator: moving average of member k over one fast period along the fast
/// axis (requires an integer number of cells per period).
Cochain averaged_member(const OscillatoryFamily& fam, std::size_t k);

/// The default schedule ε_k = 2^{-k} / (2π), k = first..last.
std::vector<double> dyadic_schedule(int first, int last);

}  // namespace divcurl
