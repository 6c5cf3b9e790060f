// flagwalk command line: run scenario experiments, list bundled scenarios.
//
// Exit codes: 0 success, 1 experiment failure (partial report written),
// 2 configuration error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "flagwalk/runner.hpp"

namespace fs = std::filesystem;
using flagwalk::scenario::ConfigError;
using flagwalk::scenario::ScenarioConfig;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot open config file: " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig resolve_config(const std::string& arg, const std::string& scenario_dir) {
  if (fs::exists(arg)) return ScenarioConfig::parse(read_file(arg));
  if (!scenario_dir.empty()) {
    const fs::path p = fs::path(scenario_dir) / (arg + ".json");
    if (fs::exists(p)) return ScenarioConfig::parse(read_file(p));
    throw ConfigError("no config file or scenario named '" + arg + "' in " + scenario_dir);
  }
  if (auto bundled = flagwalk::scenario::find_bundled(arg)) return *bundled;
  throw ConfigError("no config file or bundled scenario named '" + arg + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flagwalk: random walks of SL(n,R) cocycles and their Lyapunov structure"};
  app.require_subcommand(1);

  std::string config_arg, out_dir, scenario_dir;
  uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;  // 0: take the config's worker count

  auto* run = app.add_subcommand("run", "run the experiments of a scenario config");
  run->add_option("config", config_arg, "config file path or bundled scenario name")->required();
  run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--workers", workers, "worker threads for independent trials");
  run->add_option("--out", out_dir, "output directory (default out/<scenario>)");
  run->add_option("--scenario-dir", scenario_dir, "resolve scenario names in this directory");

  auto* list = app.add_subcommand("list-scenarios", "list the bundled scenario catalog");
  list->add_option("--scenario-dir", scenario_dir, "list *.json scenarios from this directory");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    const auto cat = flagwalk::scenario::catalog(scenario_dir);
    uint64_t digest = 1469598103934665603ull;
    for (const auto& e : cat) {
      std::cout << e.name << "  " << e.description << "\n";
      digest ^= flagwalk::scenario::fnv1a(e.name + "\n" + e.description);
      digest *= 1099511628211ull;
    }
    std::cout << "catalog digest: " << std::hex << digest << std::dec << "\n";
    return 0;
  }

  try {
    ScenarioConfig cfg = resolve_config(config_arg, scenario_dir);
    if (seed_set) cfg.seed = seed;
    const int effective_workers = workers > 0 ? workers : cfg.workers;

    fs::path out = out_dir.empty() ? fs::path() : fs::path(out_dir);
    if (out.empty()) {
      if (const char* env = std::getenv("FLAGWALK_OUT_DIR")) out = fs::path(env) / cfg.name;
    }
    if (out.empty()) out = fs::path("out") / cfg.name;

    auto rr = flagwalk::runner::run_scenario(cfg, effective_workers);
    flagwalk::runner::write_outputs(rr, out);
    std::cout << "report written to " << (out / "report.json").string() << "\n";
    if (rr.status == flagwalk::runner::RunStatus::experiment_failure) {
      std::cerr << "one or more experiments failed; see the failures section of the report\n";
      return 1;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
