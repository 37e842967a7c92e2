#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cli/artifacts.hpp"
#include "cli/config.hpp"

namespace divcurl::cli {

/// Named pass/fail flags of one run; the exit status is a function of these alone.
struct Verdict {
  std::vector<std::pair<std::string, bool>> flags;

  void add(std::string name, bool pass) { flags.emplace_back(std::move(name), pass); }
  bool pass() const;
};

struct Experiment {
  std::string name;
  std::string description;
  Json defaults;
  /// Module invariants reachable from the (shape-valid) parameters, as "field: rule".
  std::function<std::vector<std::string>(const ExperimentConfig&)> validate;
  std::function<Verdict(const ExperimentConfig&, ArtifactWriter&)> run;
};

/// Registered experiments, alphabetized by name.
const std::vector<Experiment>& experiments();
const Experiment* find_experiment(const std::string& name);

/// Shape violations from the overlay followed by the experiment's own checks.
std::vector<std::string> validate(const ExperimentConfig& config);

// Registration hooks, one per translation unit.
void register_divcurl_experiments(std::vector<Experiment>& out);
void register_operator_experiments(std::vector<Experiment>& out);
void register_geometry_experiments(std::vector<Experiment>& out);
void register_rigidity_experiments(std::vector<Experiment>& out);

}  // namespace divcurl::cli
