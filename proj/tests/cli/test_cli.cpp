#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "cli/app.hpp"
#include "cli/config.hpp"
#include "cli/experiments.hpp"

using namespace divcurl::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::path(DIVCURL_CLI_SCRATCH);

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "divcurl-forge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kScratch);
  const fs::path p = kScratch / (name + ".json");
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_line(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (line.rfind(prefix, 0) == 0) return true;
  return false;
}

}  // namespace

TEST_CASE("list") {
  const Result a = cli({"list"}), b = cli({"list"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(has_line(a.out, "divcurl_positive "));
  CHECK(has_line(a.out, "rigidity_corrugation "));
  std::vector<std::string> names;
  for (const auto& e : experiments()) names.push_back(e.name);
  CHECK(std::is_sorted(names.begin(), names.end()));
  CHECK(names.size() == 7);
}

TEST_CASE("config parsing and hashing") {
  SUBCASE("defaults fill every field") {
    const ExperimentConfig c = parse_config(R"({"experiment": "gcr_golden"})");
    CHECK(c.violations.empty());
    CHECK(c.params == find_experiment("gcr_golden")->defaults);
    CHECK(c.seed == 0);
  }
  SUBCASE("1 and 1.0 hash alike, the output directory does not count, the seed does") {
    const auto a = parse_config(R"({"experiment": "rigidity_corrugation", "family": {"kappa0": 1}})");
    const auto b = parse_config(R"({"experiment": "rigidity_corrugation", "family": {"kappa0": 1.0}, "output": "x"})");
    const auto c = parse_config(R"({"experiment": "rigidity_corrugation", "seed": 2})");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() != c.hash());
    CHECK(a.hash().size() == 16);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  }
  SUBCASE("shape violations name the field") {
    const auto c = parse_config(
        R"({"experiment": "divcurl_positive", "grid": {"resolution": [64, 64.5], "spacing": 1}, "tests": "one", "seed": -1})");
    const auto has = [&](const std::string& s) {
      return std::find(c.violations.begin(), c.violations.end(), s) != c.violations.end();
    };
    CHECK(has("grid.resolution[1]: expected an integer"));
    CHECK(has("grid.spacing: unknown field"));
    CHECK(has("tests: expected an array"));
    CHECK(has("seed: must be a non-negative integer"));
  }
  SUBCASE("unknown experiments are violations, unreadable documents are errors") {
    CHECK(validate(parse_config(R"({"experiment": "nope"})")).front() == "experiment: unknown experiment 'nope'");
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed": 1})"), ConfigError);
  }
}

TEST_CASE("validate") {
  SUBCASE("every default config is valid") {
    for (const auto& e : experiments()) {
      INFO(e.name);
      CHECK(validate(parse_config(R"({"experiment": ")" + e.name + "\"}")).empty());
      const Result r = cli({"validate", "--config", write_config("default_" + e.name, R"({"experiment": ")" + e.name + "\"}").string()});
      CHECK(r.code == 0);
      CHECK(r.out.rfind("ok " + e.name, 0) == 0);
    }
  }
  SUBCASE("4 cells per period violates epsilon resolvability") {
    const auto lab = validate(parse_config(
        R"({"experiment": "divcurl_negative", "grid": {"resolution": [256, 256]}, "schedule": {"first": 3, "last": 6}})"));
    CHECK(std::any_of(lab.begin(), lab.end(), [](const std::string& s) {
      return s.rfind("schedule: epsilon resolvability", 0) == 0;
    }));
    const auto rig = validate(parse_config(R"({"experiment": "rigidity_corrugation", "chart": {"cells": [256, 8]}})"));
    CHECK(std::any_of(rig.begin(), rig.end(), [](const std::string& s) {
      return s.rfind("schedule: epsilon resolvability", 0) == 0;
    }));
  }
  SUBCASE("negative tolerances") {
    const auto v = validate(parse_config(R"({"experiment": "hodge_decomposition", "tolerances": {"orthogonality": -1e-6}})"));
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "tolerances.orthogonality: must be positive");
  }
  SUBCASE("module rules reach the config") {
    const auto imm = validate(parse_config(R"({"experiment": "rigidity_corrugation", "family": {"kappa0": 30}})"));
    CHECK(std::any_of(imm.begin(), imm.end(), [](const std::string& s) { return s.rfind("schedule: immersivity", 0) == 0; }));
    const auto srf = validate(parse_config(R"({"experiment": "gcr_golden", "surfaces": ["torus"], "resolutions": [64]})"));
    CHECK(srf.size() == 2);
    const auto prof = validate(parse_config(R"({"experiment": "divcurl_negative", "family": {"fast": "one"}})"));
    CHECK(prof.size() == 1);
    const auto op = validate(parse_config(R"({"experiment": "operator_pair", "degree": 2, "dims": [2]})"));
    CHECK(op.size() == 1);
  }
  SUBCASE("exit codes") {
    const Result bad = cli({"validate", "--config", write_config("bad", R"({"experiment": "hodge_decomposition", "samples": 0})").string()});
    CHECK(bad.code == 2);
    CHECK(bad.out == "violation: samples: at least one\n");
    CHECK(cli({"validate", "--config", (kScratch / "missing.json").string()}).code == 2);
    CHECK(cli({"validate"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
  }
}

TEST_CASE("run") {
  SUBCASE("unknown experiment: nonzero exit, nothing written") {
    const fs::path out = kScratch / "run_unknown";
    fs::remove_all(out);
    const Result r = cli({"run", "--config", write_config("unknown", R"({"experiment": "nope"})").string(), "--out", out.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("unknown experiment") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
  }
  SUBCASE("I/O failure is a runtime error") {
    const fs::path blocker = kScratch / "blocker";
    std::ofstream(blocker) << "file";
    const Result r = cli({"run", "--config", write_config("hodge", R"({"experiment": "hodge_decomposition"})").string(),
                          "--out", (blocker / "sub").string()});
    CHECK(r.code == 3);
    CHECK(r.err.rfind("runtime error", 0) == 0);
  }
  SUBCASE("byte-identical artifacts, each carrying the config hash") {
    const fs::path cfg = write_config("realize", R"({"experiment": "realization_roundtrip", "seed": 7, "resolution": 32, "gauge_resolution": 16, "holonomy_resolutions": [16, 32]})");
    const fs::path a = kScratch / "det_a", b = kScratch / "det_b";
    fs::remove_all(a);
    fs::remove_all(b);
    const Result ra = cli({"run", "--config", cfg.string(), "--out", a.string()});
    const Result rb = cli({"run", "--config", cfg.string(), "--out", b.string()});
    CHECK(ra.code == rb.code);
    const std::string hash = load_config(cfg).hash();
    int files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      INFO(name);
      CHECK(slurp(entry.path()) == slurp(b / name));
      CHECK(slurp(entry.path()).find(hash) != std::string::npos);
      ++files;
    }
    CHECK(files == 6);
  }
  SUBCASE("the non-isometric control fails its verdict") {
    const fs::path out = kScratch / "control";
    const Result r = cli({"run", "--config",
                          write_config("control", R"({"experiment": "rigidity_corrugation", "family": {"kind": "constant", "scale": 1.1}, "chart": {"cells": [64, 8]}})").string(),
                          "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(has_line(r.out, "FAIL limit_verdict"));
    const Json j = Json::parse(slurp(out / "rigidity.json"));
    CHECK(j["limit"]["checks"][0]["name"] == "a");
    CHECK(j["limit"]["checks"][0]["value"].get<double>() == doctest::Approx(0.21).epsilon(1e-6));
  }
}

TEST_CASE("default runs") {
  SUBCASE("divcurl_negative: final-row gap within 2% of mean(s^2) - mean(s)^2") {
    const fs::path out = kScratch / "negative";
    const Result r = cli({"run", "--config", write_config("negative", R"({"experiment": "divcurl_negative"})").string(), "--out", out.string()});
    CHECK(r.code == 0);
    std::istringstream csv(slurp(out / "convergence.csv"));
    std::string line, last;
    while (std::getline(csv, line))
      if (!line.empty() && line[0] != '#') last = line;
    // epsilon,test_id,pairing,gap,...
    std::vector<std::string> cells;
    std::istringstream row(last);
    for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() >= 4);
    CHECK(cells[1] == "one");
    CHECK(std::abs(std::stod(cells[3]) - 0.5) <= 0.02 * 0.5);
  }
  SUBCASE("rigidity_corrugation: verdict pass block with checks a-e") {
    const fs::path out = kScratch / "rigidity";
    const Result r = cli({"run", "--config", write_config("rigidity", R"({"experiment": "rigidity_corrugation"})").string(), "--out", out.string()});
    CHECK(r.code == 0);
    const Json j = Json::parse(slurp(out / "rigidity.json"));
    CHECK(j["limit"]["verdict"] == true);
    std::string names;
    for (const auto& c : j["limit"]["checks"]) {
      names += c["name"].get<std::string>();
      CHECK(c["pass"] == true);
    }
    CHECK(names == "abcde");
    const Json v = Json::parse(slurp(out / "verdict.json"));
    CHECK(v["pass"] == true);
  }
}
