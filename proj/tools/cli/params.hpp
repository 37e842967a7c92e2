#pragma once

// Reading shape-validated parameters and the value rules shared by several experiments.

#include <cmath>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "divcurl/oscillatory.hpp"

namespace divcurl::cli {

/// "schedule": {"first", "last", "epsilons"}; a non-empty epsilons list wins over the dyadic
/// range 2^-k / (2π), k = first..last.
inline std::vector<double> schedule_from(const Json& s) {
  const auto explicit_eps = s.at("epsilons").get<std::vector<double>>();
  if (!explicit_eps.empty()) return explicit_eps;
  const int first = s.at("first").get<int>(), last = s.at("last").get<int>();
  if (first < 0 || last < first || last > 60) return {};
  return dyadic_schedule(first, last);
}

inline void check_schedule(const Json& s, const std::string& path, std::vector<std::string>& out) {
  if (!s.at("epsilons").empty()) return;
  const int first = s.at("first").get<int>(), last = s.at("last").get<int>();
  if (first < 0) out.push_back(path + ".first: must be >= 0");
  if (last < first) out.push_back(path + ".last: must be >= first");
  if (last > 60) out.push_back(path + ".last: must be <= 60");
}

/// Every number in the object must be finite and positive.
inline void check_positive(const Json& obj, const std::string& path, std::vector<std::string>& out) {
  for (const auto& [k, v] : obj.items())
    if (v.is_number() && !(std::isfinite(v.get<double>()) && v.get<double>() > 0.0))
      out.push_back(path + "." + k + ": must be positive");
}

inline void prefix_all(const std::vector<std::string>& in, const std::string& path, std::vector<std::string>& out) {
  for (const auto& v : in) out.push_back(path + ": " + v);
}

}  // namespace divcurl::cli
