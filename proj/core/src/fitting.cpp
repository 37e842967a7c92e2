#include "divcurl/fitting.hpp"

#include <cmath>
#include <limits>

#include "divcurl/error.hpp"

namespace divcurl {

OrderFit fit_order(const std::vector<double>& x, const std::vector<double>& err, double floor) {
  if (x.size() != err.size()) throw ShapeError("fit_order: length mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw InvalidArgument("fit_order: abscissae must be positive");
    if (!(err[i] > floor)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  OrderFit fit;
  fit.points_used = n;
  if (n < 2) {
    fit.exact = true;
    fit.order = std::numeric_limits<double>::infinity();
    return fit;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw InvalidArgument("fit_order: abscissae must not all coincide");
  fit.order = (n * sxy - sx * sy) / denom;
  return fit;
}

OrderFit measured_order(double coarse, double fine, double ratio, double floor) {
  OrderFit fit;
  if (coarse <= floor && fine <= floor) {
    fit.exact = true;
    fit.order = std::numeric_limits<double>::infinity();
    return fit;
  }
  fit.points_used = 2;
  if (fine <= 0.0) {
    fit.order = std::numeric_limits<double>::infinity();
    return fit;
  }
  fit.order = std::log(coarse / fine) / std::log(ratio);
  return fit;
}

}  // namespace divcurl
