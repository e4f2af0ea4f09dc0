// Batch front end: reads a scenario file, runs the requested analyses, writes CSV/JSON.
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rangeshift/error.hpp"
#include "rangeshift/scenario.hpp"

namespace {

constexpr const char* kSubcommands[] = {"portrait",       "stationary", "evolve", "classify", "sigma-star",
                                        "critical-speed", "sweep",      "diagnose"};

}  // namespace

int main(int argc, char** argv) {
  using namespace rangeshift;

  CLI::App app{"rangeshift: persistence and spreading under a shifting habitat edge"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "scenario file")->required();
  app.add_option("--out", out_dir, "output directory (default: out/<name>)");
  app.add_option("--workers", workers, "worker threads for threshold searches and sweeps")
      ->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "extra 'key=value' entries applied after the file");

  std::vector<CLI::App*> subs;
  subs.push_back(app.add_subcommand("run", "run the analyses listed in the scenario"));
  for (const char* name : kSubcommands) subs.push_back(app.add_subcommand(name, std::string("run '") + name + "'"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::vector<ConfigEntry> entries;
  Scenario scenario;
  try {
    entries = read_config(config_path);
    for (const std::string& o : overrides) {
      auto parsed = parse_config(o);
      if (parsed.size() != 1) throw Error(ErrorKind::ConfigError, "--set expects key=value, got '" + o + "'");
      parsed[0].line = 0;
      entries.push_back(parsed[0]);
    }
    for (CLI::App* sub : subs) {
      if (sub->parsed() && sub->get_name() != "run") entries.push_back({"analyses", sub->get_name(), 0});
    }
    if (workers > 0) entries.push_back({"workers", std::to_string(workers), 0});
    scenario = build_scenario(entries);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  const std::filesystem::path out = out_dir.empty() ? std::filesystem::path("out") / scenario.name : std::filesystem::path(out_dir);
  const int code = run_scenario(scenario, out, std::cout);
  if (code != 0) std::cerr << "failed with exit status " << code << " (see " << (out / "error.json").string() << ")\n";
  return code;
}
