#pragma once

// Scenario configuration: JSON schema, validation into a CocycleSystem, and
// the bundled catalog. Matrices are row-major number arrays.

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flagwalk/scenario_data.hpp"
#include "flagwalk/walk.hpp"

namespace flagwalk::scenario {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct ScenarioConfig {
  std::string name;
  std::string description;
  int dimension = 0;
  std::vector<std::string> states;
  Vec base_distribution;
  bool allow_asymmetric = false;
  uint64_t seed = 1;
  int workers = 1;
  std::vector<walk::Atom> atoms;
  json experiments = json::object();

  static ScenarioConfig parse(const std::string& text) {
    json j;
    try {
      j = json::parse(text);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return from_json(j);
  }

  static ScenarioConfig from_json(const json& j) {
    ScenarioConfig c;
    try {
      c.name = j.value("name", "unnamed");
      c.description = j.value("description", "");
      c.dimension = j.at("dimension").get<int>();
      if (c.dimension < 2) throw ConfigError("dimension must be >= 2");
      c.states = j.value("states", std::vector<std::string>{"*"});
      const auto bd = j.value("base_distribution", std::vector<double>(c.states.size() == 1 ? 1 : 0, 1.0));
      c.base_distribution = Vec(long(bd.size()));
      for (size_t i = 0; i < bd.size(); ++i) c.base_distribution(long(i)) = bd[i];
      c.allow_asymmetric = j.value("allow_asymmetric", false);
      c.seed = j.value("seed", uint64_t(1));
      c.workers = j.value("workers", 1);
      if (c.workers < 1) throw ConfigError("workers must be >= 1");
      if (!j.contains("atoms") || !j.at("atoms").is_array() || j.at("atoms").empty())
        throw ConfigError("config needs a non-empty atoms array");
      for (const auto& ja : j.at("atoms")) {
        walk::Atom a;
        a.prob = ja.at("probability").get<double>();
        a.base_map = ja.value("base_map", std::vector<int>(c.states.size(), 0));
        if (a.base_map.empty())
          for (size_t s = 0; s < c.states.size(); ++s) a.base_map.push_back(int(s));
        const auto& jm = ja.at("matrices");
        if (!jm.is_array() || jm.size() != c.states.size())
          throw ConfigError("each atom needs one matrix per state");
        for (const auto& row : jm) {
          const auto flat = row.get<std::vector<double>>();
          if (int(flat.size()) != c.dimension * c.dimension)
            throw ConfigError("matrix entry count does not match dimension^2 (row-major)");
          Mat m(c.dimension, c.dimension);
          for (int r = 0; r < c.dimension; ++r)
            for (int col = 0; col < c.dimension; ++col)
              m(r, col) = flat[size_t(r * c.dimension + col)];
          a.mats.push_back(std::move(m));
        }
        c.atoms.push_back(std::move(a));
      }
      c.experiments = j.value("experiments", json::object());
      if (!c.experiments.is_object()) throw ConfigError("experiments must be an object");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config field error: ") + e.what());
    }
    return c;
  }

  // Builds and validates the cocycle system; validation failures surface as
  // ConfigError with the violated invariant in the message.
  walk::CocycleSystem build_system() const {
    try {
      return walk::CocycleSystem(dimension, states, atoms, base_distribution, allow_asymmetric);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid cocycle system: ") + e.what());
    }
  }

  json to_json() const {
    json j;
    j["name"] = name;
    j["description"] = description;
    j["dimension"] = dimension;
    j["states"] = states;
    std::vector<double> bd(base_distribution.data(), base_distribution.data() + base_distribution.size());
    j["base_distribution"] = bd;
    j["allow_asymmetric"] = allow_asymmetric;
    j["seed"] = seed;
    j["workers"] = workers;
    j["atoms"] = json::array();
    for (const auto& a : atoms) {
      json ja;
      ja["probability"] = a.prob;
      ja["base_map"] = a.base_map;
      ja["matrices"] = json::array();
      for (const auto& m : a.mats) {
        std::vector<double> flat;
        for (int r = 0; r < m.rows(); ++r)
          for (int c2 = 0; c2 < m.cols(); ++c2) flat.push_back(m(r, c2));
        ja["matrices"].push_back(flat);
      }
      j["atoms"].push_back(ja);
    }
    j["experiments"] = experiments;
    return j;
  }

  std::string normalized() const { return to_json().dump(2) + "\n"; }
  uint64_t digest() const { return fnv1a(normalized()); }
};

struct CatalogEntry {
  std::string name;
  std::string description;
  std::string text;
};

// Catalog either from the embedded bundle or, when a directory override is
// given, from the *.json files in that directory.
inline std::vector<CatalogEntry> catalog(const std::string& dir_override = "") {
  std::vector<CatalogEntry> out;
  if (dir_override.empty()) {
    for (const auto& b : scenario_data::catalog()) out.push_back({b.name, b.description, b.text});
    return out;
  }
  namespace fs = std::filesystem;
  if (!fs::exists(dir_override)) return out;
  std::vector<fs::path> files;
  for (const auto& ent : fs::directory_iterator(dir_override))
    if (ent.path().extension() == ".json") files.push_back(ent.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    CatalogEntry e{p.stem().string(), "", ss.str()};
    try {
      e.description = json::parse(e.text).value("description", "");
    } catch (...) {
      e.description = "(unparseable)";
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::optional<ScenarioConfig> find_bundled(const std::string& name) {
  for (const auto& b : scenario_data::catalog())
    if (name == b.name) return ScenarioConfig::parse(b.text);
  return std::nullopt;
}

}  // namespace flagwalk::scenario
