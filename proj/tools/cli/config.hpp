#pragma once

// Experiment configuration: one JSON document per run.
//
//   {"experiment": "<name>", "seed": 0, "output": "dir", ...experiment parameters}
//
// Parameters are overlaid on the experiment's defaults. Keys the defaults do not know and
// values whose JSON type differs from the default are violations, so a config that
// validates has exactly the shape of the defaults.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace divcurl::cli {

using Json = nlohmann::json;

/// The document could not be read or is not a JSON object with an experiment name.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::filesystem::path output = "divcurl-out";
  Json params = Json::object();  // effective parameters after the overlay
  std::vector<std::string> violations;  // shape violations found by the overlay

  /// FNV-1a 64 of the canonical dump of experiment, seed and params, as 16 hex digits.
  /// The output directory is not part of the hash.
  std::string hash() const;
  /// experiment, seed and params as one document (what the hash covers).
  Json canonical() const;
};

/// Parses a config document against the defaults of its experiment. Throws ConfigError
/// for unparsable text, a missing or unknown experiment name, or a malformed seed/output.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Recursive overlay of `user` on `defaults`; violations are "path: rule".
Json overlay(const Json& defaults, const Json& user, const std::string& path, std::vector<std::string>& violations);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace divcurl::cli
