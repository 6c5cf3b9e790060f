#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "flagwalk/runner.hpp"
#include "flagwalk/scenario.hpp"

using namespace flagwalk;
using namespace flagwalk::scenario;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("every bundled scenario parses and builds a valid system") {
  const auto cat = catalog();
  REQUIRE(cat.size() == 6);
  for (const auto& e : cat) {
    auto cfg = ScenarioConfig::parse(e.text);
    REQUIRE(cfg.name == e.name);
    REQUIRE_NOTHROW(cfg.build_system());
  }
}

TEST_CASE("embedded catalog matches the files under scenarios/") {
  const char* repo = std::getenv("FLAGWALK_REPO_DIR");
  REQUIRE(repo != nullptr);
  for (const auto& e : catalog()) {
    const auto path = std::filesystem::path(repo) / "scenarios" / (e.name + ".json");
    REQUIRE(std::filesystem::exists(path));
    REQUIRE(read_file(path) == e.text);
  }
}

TEST_CASE("config validation failures carry the violated invariant") {
  // probabilities sum to 0.9
  const std::string bad_prob = R"({
    "dimension": 2,
    "atoms": [
      {"probability": 0.45, "base_map": [0], "matrices": [[2,0,0,0.5]]},
      {"probability": 0.45, "base_map": [0], "matrices": [[0.5,0,0,2]]}
    ]
  })";
  REQUIRE_THROWS_WITH(ScenarioConfig::parse(bad_prob).build_system(),
                      Catch::Matchers::ContainsSubstring("sum"));

  const std::string bad_det = R"({
    "dimension": 2,
    "atoms": [{"probability": 1.0, "base_map": [0], "matrices": [[2,0,0,2]]}]
  })";
  REQUIRE_THROWS_WITH(ScenarioConfig::parse(bad_det).build_system(),
                      Catch::Matchers::ContainsSubstring("determinant"));

  const std::string bad_shape = R"({
    "dimension": 2,
    "atoms": [{"probability": 1.0, "base_map": [0], "matrices": [[2,0,0]]}]
  })";
  REQUIRE_THROWS_AS(ScenarioConfig::parse(bad_shape), ConfigError);

  REQUIRE_THROWS_AS(ScenarioConfig::parse("{ not json"), ConfigError);
}

TEST_CASE("normalization is idempotent and digests are stable") {
  for (const auto& e : catalog()) {
    auto cfg = ScenarioConfig::parse(e.text);
    const std::string once = cfg.normalized();
    auto cfg2 = ScenarioConfig::parse(once);
    REQUIRE(cfg2.normalized() == once);
    REQUIRE(cfg2.digest() == cfg.digest());
  }
}

TEST_CASE("full-report expands to the complete experiment set") {
  nlohmann::json experiments = {{"full-report", nlohmann::json::object()}};
  auto expanded = runner::normalize_experiments(experiments);
  for (const auto& name : runner::experiment_order()) REQUIRE(expanded.contains(name));
  // defaults materialize idempotently
  REQUIRE(runner::normalize_experiments(expanded) == expanded);
}

TEST_CASE("directory catalog override") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "flagwalk_empty_catalog";
  fs::create_directories(dir);
  for (const auto& e : fs::directory_iterator(dir)) fs::remove(e.path());
  REQUIRE(catalog(dir.string()).empty());

  std::ofstream(dir / "mini.json") << R"({"description": "tiny", "dimension": 2, "atoms": []})";
  auto cat = catalog(dir.string());
  REQUIRE(cat.size() == 1);
  REQUIRE(cat[0].name == "mini");
  REQUIRE(cat[0].description == "tiny");
}

TEST_CASE("curve files carry the documented header and shape") {
  runner::Curve c{"probe", {{100.0, 0.5}, {1000.0, 0.25}}};
  const auto dir = std::filesystem::temp_directory_path() / "flagwalk_curvetest";
  std::filesystem::create_directories(dir);
  runner::write_curve(dir, c);
  std::ifstream in(dir / "probe.csv");
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  REQUIRE(header == "horizon,value");
  REQUIRE(row1 == "100,0.5");
  REQUIRE(row2 == "1000,0.25");
}
