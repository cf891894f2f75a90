#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wban/energy.hpp"
#include "wban/mac_sim.hpp"
#include "wban/topology.hpp"

namespace wban {

inline constexpr int kScenarioSchemaVersion = 1;

struct AnalysisParams {
  /// Linear outage threshold for the outage / reuse estimators. 0 selects
  /// the threshold automatically so the original scheme's outage is near
  /// target_p_out.
  double thr_outage_mw = 0.0;
  double target_p_out = 0.35;
  int reference_region = 0;
};

/// Everything a run needs, after defaults and overrides.
struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::uint64_t seed = 42;
  TopologySpec topology;
  MacParams mac;
  EnergyModel energy;  // tx_power_dbm mirrors topology.radio
  AnalysisParams analysis;
  int frames = 200;
  int trials = 100000;
};

/// The reference 3-region scenario with every default spelled out.
Scenario reference_scenario();

nlohmann::json scenario_to_json(const Scenario& scenario);
/// Missing keys take their defaults; unknown keys, a wrong schema_version or
/// mistyped values throw ConfigError.
Scenario scenario_from_json(const nlohmann::json& doc);

/// Replaces an existing key. `key` is dotted ("radio.shadowing_sigma_db",
/// "regions.0.sources.1.x"); `value` is parsed as JSON, falling back to a
/// plain string. Throws ConfigError for keys absent from the document or a
/// value of a different type.
void apply_override(nlohmann::json& doc, const std::string& key, const std::string& value);

/// "key=value" -> (key, value); throws ConfigError without '='.
std::pair<std::string, std::string> split_override(const std::string& assignment);

/// Reads a scenario file, fills defaults and applies overrides in order.
Scenario load_scenario(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides = {});
/// Same starting from an in-memory document.
Scenario resolve_scenario(nlohmann::json doc, const std::vector<std::string>& overrides = {});

}  // namespace wban
