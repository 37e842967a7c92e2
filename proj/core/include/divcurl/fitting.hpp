#pragma once

#include <vector>

namespace divcurl {

/// Empirical convergence order of err ~ C x^p.
struct OrderFit {
  double order = 0.0;  // +inf when every error sits at or below the noise floor
  bool exact = false;  // errors indistinguishable from roundoff: no order to measure
  int points_used = 0;
};

/// Least-squares slope of log(err) against log(x) over the entries with err > floor.
/// Fewer than two such entries means the sequence is exact to roundoff.
OrderFit fit_order(const std::vector<double>& x, const std::vector<double>& err, double floor = 0.0);

/// Order between two resolutions whose step sizes differ by `ratio`:
/// log(coarse / fine) / log(ratio), or exact when both are at or below `floor`.
OrderFit measured_order(double coarse, double fine, double ratio = 2.0, double floor = 0.0);

/// True when the fit is exact or its order is at least `minimum`.
inline bool order_at_least(const OrderFit& f, double minimum) { return f.exact || f.order >= minimum; }

}  // namespace divcurl
