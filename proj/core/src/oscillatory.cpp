#include "divcurl/oscillatory.hpp"

#include <bit>
#include <cmath>
#include <memory>
#include <numbers>

#include "divcurl/error.hpp"

namespace divcurl {

namespace {
constexpr double pi = std::numbers::pi;
}

Profile Profile::sine() { return {"sin", [](double t) { return std::sin(t); }, 2 * pi, 0.0, 0.5}; }
Profile Profile::cosine() { return {"cos", [](double t) { return std::cos(t); }, 2 * pi, 0.0, 0.5}; }
Profile Profile::one_plus_sine() { return {"1+sin", [](double t) { return 1.0 + std::sin(t); }, 2 * pi, 1.0, 1.5}; }
Profile Profile::one_plus_cosine() { return {"1+cos", [](double t) { return 1.0 + std::cos(t); }, 2 * pi, 1.0, 1.5}; }
Profile Profile::sine_squared() {
  return {"sin^2", [](double t) { return std::sin(t) * std::sin(t); }, 2 * pi, 0.5, 0.375};
}
Profile Profile::constant(double c) { return {"one", [c](double) { return c; }, 1.0, c, c * c, true}; }

Profile Profile::from_samples(std::vector<double> samples) {
  if (samples.size() < 2) throw InvalidArgument("sampled profile needs at least two samples");
  for (double s : samples)
    if (!std::isfinite(s)) throw InvalidArgument("sampled profile values must be finite");
  const auto n = samples.size();
  double mean = 0.0, msq = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = samples[j], b = samples[(j + 1) % n];
    mean += 0.5 * (a + b);
    msq += (a * a + a * b + b * b) / 3.0;
  }
  auto table = std::make_shared<std::vector<double>>(std::move(samples));
  auto f = [table](double t) {
    const auto& s = *table;
    const double n = static_cast<double>(s.size());
    double u = (t - std::floor(t)) * n;
    auto j = static_cast<std::size_t>(u);
    if (j >= s.size()) j = s.size() - 1;
    const double frac = u - static_cast<double>(j);
    return (1.0 - frac) * s[j] + frac * s[(j + 1) % s.size()];
  };
  return {"samples", f, 1.0, mean / static_cast<double>(n), msq / static_cast<double>(n)};
}

Profile Profile::named(const std::string& name) {
  if (name == "sin") return sine();
  if (name == "cos") return cosine();
  if (name == "1+sin") return one_plus_sine();
  if (name == "1+cos") return one_plus_cosine();
  if (name == "sin^2") return sine_squared();
  if (name == "one") return constant(1.0);
  throw InvalidArgument("unknown fast profile '" + name + "'");
}

SlowProfile SlowProfile::one() { return {"one", [](const Point&) { return 1.0; }}; }

SlowProfile SlowProfile::named(const std::string& name) {
  if (name == "one") return one();
  if (name == "cos2pix2") return {name, [](const Point& x) { return 1.0 + 0.5 * std::cos(2 * pi * x[1]); }};
  if (name == "sin2pix1x2") return {name, [](const Point& x) { return std::sin(2 * pi * (x[0] + x[1])); }};
  throw InvalidArgument("unknown slow profile '" + name + "'");
}

double OscillatoryFamily::cells_per_period(std::size_t k) const {
  const double h = period.at(static_cast<std::size_t>(direction)) / resolution.at(static_cast<std::size_t>(direction));
  return fast.period * epsilons.at(k) / h;
}

std::vector<std::string> OscillatoryFamily::violations() const {
  std::vector<std::string> out;
  const int dim = static_cast<int>(resolution.size());
  if (dim != 2 && dim != 3) out.push_back("resolution: dimension must be 2 or 3");
  if (period.size() != resolution.size()) out.push_back("period: one entry per axis");
  for (int n : resolution)
    if (n < 4) out.push_back("resolution: every axis needs at least 4 cells");
  for (double p : period)
    if (!(p > 0.0)) out.push_back("period: must be positive");
  if (direction < 0 || direction >= dim) out.push_back("direction: axis index out of range");
  if (degree < 0 || degree > dim) out.push_back("degree: out of range");
  if (std::popcount(axis_set) != degree || (dim > 0 && (axis_set >> dim) != 0))
    out.push_back("axis_set: must name `degree` distinct axes of the grid");
  if (!fast.f) out.push_back("fast_profile: missing");
  if (!slow.v) out.push_back("slow_profile: missing");
  if (!std::isfinite(fast.mean) || !std::isfinite(fast.mean_square)) out.push_back("fast_profile: moments must be finite");
  if (epsilons.empty()) out.push_back("epsilon_schedule: empty");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0)) out.push_back("epsilon_schedule: entries must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) out.push_back("epsilon_schedule: must be strictly decreasing");
  }
  if (out.empty() && !fast.flat) {
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
      if (cells_per_period(k) < kMinCellsPerPeriod * (1.0 - 1e-12)) {
        out.push_back("epsilon resolvability: entry " + std::to_string(k) + " has " +
                      std::to_string(cells_per_period(k)) + " cells per fast period (need >= 8)");
      }
    }
  }
  return out;
}

void OscillatoryFamily::validate() const {
  const auto v = violations();
  if (!v.empty()) throw InvalidArgument("oscillatory family: " + v.front());
}

Cochain gen_oscillatory_form(const OscillatoryFamily& fam, std::size_t k) {
  fam.validate();
  if (k >= fam.epsilons.size()) throw InvalidArgument("schedule index out of range");
  const double eps = fam.epsilons[k];
  const double scale = std::pow(eps, fam.amplitude_power);
  const AxisMask target = fam.axis_set;
  const int dir = fam.direction;
  return integrate_form(fam.grid(), fam.degree, [&](AxisMask s, const Point& x) {
    return s == target ? scale * fam.slow.v(x) * fam.fast.f(x[static_cast<std::size_t>(dir)] / eps) : 0.0;
  });
}

Cochain weak_limit(const OscillatoryFamily& fam) {
  fam.validate();
  const double factor = fam.amplitude_power > 0.0 ? 0.0 : fam.fast.mean;
  const AxisMask target = fam.axis_set;
  return integrate_form(fam.grid(), fam.degree,
                        [&](AxisMask s, const Point& x) { return s == target ? factor * fam.slow.v(x) : 0.0; });
}

Cochain averaged_member(const OscillatoryFamily& fam, std::size_t k) {
  const Cochain c = gen_oscillatory_form(fam, k);
  const double cells = fam.cells_per_period(k);
  const auto window = static_cast<int>(std::lround(cells));
  if (std::abs(cells - window) > 1e-9) throw InvalidArgument("averaging needs an integer number of cells per period");
  const PeriodicGrid& g = c.grid();
  const std::size_t nn = g.node_count();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.size()));
  const auto& sets = g.axis_sets(fam.degree);
  for (std::size_t s = 0; s < sets.size(); ++s)
    for (std::size_t m = 0; m < nn; ++m) {
      double acc = 0.0;
      std::size_t node = m;
      for (int j = 0; j < window; ++j, node = g.shifted(node, fam.direction, 1)) acc += c.value(static_cast<int>(s), node);
      out[static_cast<Eigen::Index>(s * nn + m)] = acc / window;
    }
  return c.with_values(std::move(out));
}

std::vector<double> dyadic_schedule(int first, int last) {
  std::vector<double> e;
  for (int k = first; k <= last; ++k) e.push_back(std::ldexp(1.0, -k) / (2 * pi));
  return e;
}

}  // namespace divcurl
