#include "cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli/experiments.hpp"

namespace divcurl::cli {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

bool is_integer(const Json& j) { return j.is_number_integer() || j.is_number_unsigned(); }

// Checks one scalar against the type of its default and normalizes numbers to the default's
// representation so that 1 and 1.0 hash alike.
Json scalar(const Json& def, const Json& user, const std::string& path, std::vector<std::string>& violations) {
  if (def.is_string()) {
    if (!user.is_string()) violations.push_back(path + ": expected a string");
    return user.is_string() ? user : def;
  }
  if (def.is_boolean()) {
    if (!user.is_boolean()) violations.push_back(path + ": expected a boolean");
    return user.is_boolean() ? user : def;
  }
  if (is_integer(def)) {
    if (!is_integer(user)) {
      violations.push_back(path + ": expected an integer");
      return def;
    }
    return Json(user.get<long long>());
  }
  if (def.is_number()) {
    if (!user.is_number()) {
      violations.push_back(path + ": expected a number");
      return def;
    }
    return Json(user.get<double>());
  }
  return user;
}

}  // namespace

Json overlay(const Json& defaults, const Json& user, const std::string& path, std::vector<std::string>& violations) {
  if (defaults.is_object()) {
    if (!user.is_object()) {
      violations.push_back((path.empty() ? "config" : path) + ": expected an object");
      return defaults;
    }
    Json out = defaults;
    for (const auto& [key, value] : user.items()) {
      const std::string p = join(path, key);
      if (!defaults.contains(key)) {
        violations.push_back(p + ": unknown field");
        continue;
      }
      out[key] = overlay(defaults[key], value, p, violations);
    }
    return out;
  }
  if (defaults.is_array()) {
    if (!user.is_array()) {
      violations.push_back(path + ": expected an array");
      return defaults;
    }
    // element type from the first default entry; empty defaults hold numbers
    const Json proto = defaults.empty() ? Json(0.0) : defaults.front();
    Json out = Json::array();
    for (std::size_t i = 0; i < user.size(); ++i)
      out.push_back(overlay(proto, user[i], path + "[" + std::to_string(i) + "]", violations));
    return out;
  }
  return scalar(defaults, user, path, violations);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

Json ExperimentConfig::canonical() const {
  return Json{{"experiment", experiment}, {"seed", seed}, {"params", params}};
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical().dump())));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig c;
  if (!doc.contains("experiment") || !doc["experiment"].is_string())
    throw ConfigError("config needs an \"experiment\" name string");
  c.experiment = doc["experiment"].get<std::string>();
  doc.erase("experiment");

  if (doc.contains("seed")) {
    const Json& s = doc["seed"];
    if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0))
      c.seed = s.get<std::uint64_t>();
    else
      c.violations.push_back("seed: must be a non-negative integer");
    doc.erase("seed");
  }
  if (doc.contains("output")) {
    if (doc["output"].is_string())
      c.output = doc["output"].get<std::string>();
    else
      c.violations.push_back("output: expected a string");
    doc.erase("output");
  }

  const Experiment* e = find_experiment(c.experiment);
  if (!e) {
    c.violations.push_back("experiment: unknown experiment '" + c.experiment + "'");
    c.params = doc;
    return c;
  }
  c.params = overlay(e->defaults, doc, "", c.violations);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace divcurl::cli
