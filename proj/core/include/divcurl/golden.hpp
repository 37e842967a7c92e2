#pragma once

// Closed-form test surfaces and metrics.

#include <functional>
#include <string>
#include <vector>

#include "divcurl/chart.hpp"
#include "divcurl/geometry.hpp"

namespace divcurl {

struct GoldenSurface {
  std::string name;
  ImmersionField immersion;
  MetricField metric;       // closed-form metric, not the finite-difference one
  FrameOptions frame;       // normal convention used by the oracles
  double diameter = 0.0;    // bounding-box diagonal of the sampled points
  std::function<double(const Point&)> gauss_curvature;  // empty when not used as an oracle
};

/// plane: (x, y, 0) on [0,1]^2.
/// cylinder: (r cos(x/r), r sin(x/r), y), r = 1, x periodic on [0, 2π), y in [0, 1].
/// sphere: r (sinθ cosφ, sinθ sinφ, cosθ), r = 1, θ in [π/4, 3π/4], φ periodic; outward normal.
/// helicoid: (u cos v, u sin v, v), u in [1/2, 3/2], v in [0, π].
/// graph_r4: (x, y, 0.4(x²-y²) + 0.1 sin 3y, 0.6xy) on [0,1]^2, codimension two.
/// `cells` is the number of cells on every axis.
GoldenSurface golden_surface(const std::string& name, int cells);

/// Names accepted by golden_surface, alphabetized.
const std::vector<std::string>& golden_surface_names();

/// e^{2λ}(dx² + dy²) with λ = amplitude · sin(2πx) on the periodic unit square.
MetricField conformal_flat_metric(int cells, double amplitude = 0.1);

/// Gauss curvature -Δλ e^{-2λ} of conformal_flat_metric.
double conformal_flat_curvature(const Point& x, double amplitude = 0.1);

}  // namespace divcurl
