#include "cli/app.hpp"

#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "cli/config.hpp"
#include "cli/experiments.hpp"

namespace divcurl::cli {

namespace {

int do_list(std::ostream& out) {
  std::size_t width = 0;
  for (const auto& e : experiments()) width = std::max(width, e.name.size());
  for (const auto& e : experiments()) out << e.name << std::string(width + 2 - e.name.size(), ' ') << e.description << "\n";
  return kPass;
}

int do_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  ExperimentConfig c;
  try {
    c = load_config(path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigInvalid;
  }
  const auto v = validate(c);
  if (v.empty()) {
    out << "ok " << c.experiment << " config_hash=" << c.hash() << "\n";
    return kPass;
  }
  for (const auto& s : v) out << "violation: " << s << "\n";
  return kConfigInvalid;
}

int do_run(const std::string& path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  ExperimentConfig c;
  try {
    c = load_config(path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigInvalid;
  }
  const auto violations = validate(c);
  if (!violations.empty()) {
    for (const auto& s : violations) err << "violation: " << s << "\n";
    return kConfigInvalid;
  }
  if (!out_dir.empty()) c.output = out_dir;

  const Experiment& e = *find_experiment(c.experiment);
  try {
    ArtifactWriter w(c.output, c.experiment, c.hash());
    w.json("config.json", {{"seed", c.seed}, {"params", c.params}});
    const Verdict v = e.run(c, w);
    Json flags = Json::array();
    for (const auto& [name, pass] : v.flags) {
      flags.push_back({{"name", name}, {"pass", pass}});
      out << (pass ? "PASS " : "FAIL ") << name << "\n";
    }
    w.json("verdict.json", {{"flags", flags}, {"pass", v.pass()}});
    out << "verdict: " << (v.pass() ? "pass" : "fail") << " (" << w.written().size() << " artifacts in "
        << c.output.string() << ")\n";
    return v.pass() ? kPass : kVerdictFail;
  } catch (const std::exception& ex) {
    err << "runtime error: " << ex.what() << "\n";
    return kRuntimeError;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Config-driven div-curl and weak-rigidity experiments", "divcurl-forge"};
  app.require_subcommand(1);
  std::string config, out_dir;
  auto* list = app.add_subcommand("list", "list registered experiments");
  auto* val = app.add_subcommand("validate", "check a config against every reachable invariant");
  val->add_option("--config", config, "JSON config file")->required();
  auto* run = app.add_subcommand("run", "run an experiment and write its CSV/JSON artifacts");
  run->add_option("--config", config, "JSON config file")->required();
  run->add_option("--out", out_dir, "output directory (overrides the config's \"output\")");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kConfigInvalid;
  }

  if (list->parsed()) return do_list(out);
  if (val->parsed()) return do_validate(config, out, err);
  return do_run(config, out_dir, out, err);
}

}  // namespace divcurl::cli
