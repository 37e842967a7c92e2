#include "cli/experiments.hpp"

#include <algorithm>

namespace divcurl::cli {

bool Verdict::pass() const {
  return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.second; });
}

const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    register_divcurl_experiments(v);
    register_operator_experiments(v);
    register_geometry_experiments(v);
    register_rigidity_experiments(v);
    std::sort(v.begin(), v.end(), [](const Experiment& a, const Experiment& b) { return a.name < b.name; });
    return v;
  }();
  return all;
}

const Experiment* find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (e.name == name) return &e;
  return nullptr;
}

std::vector<std::string> validate(const ExperimentConfig& config) {
  std::vector<std::string> out = config.violations;
  const Experiment* e = find_experiment(config.experiment);
  // the experiment's checks read the parameters, so they need a well-shaped document
  if (e && out.empty()) {
    auto more = e->validate(config);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

}  // namespace divcurl::cli
