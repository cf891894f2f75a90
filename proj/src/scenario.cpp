#include "wban/scenario.hpp"

#include <fstream>

#include <fmt/format.h>

#include "wban/errors.hpp"

namespace wban {

using nlohmann::json;

Scenario reference_scenario() {
  Scenario s;
  s.topology = reference_topology_spec();
  s.energy.tx_power_dbm = s.topology.radio.tx_power_dbm;
  return s;
}

namespace {

json point_json(Point p) { return json{{"x", p.x}, {"y", p.y}}; }

json radio_json(const RadioParams& r) {
  return json{{"tx_power_dbm", r.tx_power_dbm},
              {"sensitivity_dbm", r.sensitivity_dbm},
              {"noise_floor_dbm", r.noise_floor_dbm},
              {"data_rate_bps", r.data_rate_bps},
              {"base_frequency_hz", r.base_frequency_hz},
              {"path_loss_exponent", r.path_loss_exponent},
              {"num_subchannels", r.num_subchannels},
              {"ref_distance_m", r.ref_distance_m},
              {"pl_ref_db", r.pl_ref_db},
              {"shadowing_sigma_db", r.shadowing_sigma_db},
              {"delta_thr_db", r.delta_thr_db}};
}

json mac_json(const MacParams& m) {
  return json{{"demod_threshold_db", m.demod_threshold_db},
              {"max_retries", m.max_retries},
              {"cw_init", m.cw_init},
              {"cw_max", m.cw_max},
              {"slot_duration_s", m.slot_duration_s},
              {"access_slots", m.access_slots},
              {"uplink_slots", m.uplink_slots},
              {"queue_limit", m.queue_limit}};
}

json energy_json(const EnergyModel& e) {
  return json{{"p_circuit_tx_w", e.p_circuit_tx_w},
              {"p_circuit_rx_w", e.p_circuit_rx_w},
              {"p_idle_w", e.p_idle_w},
              {"p_sense_w", e.p_sense_w}};
}

json analysis_json(const AnalysisParams& a) {
  return json{{"thr_outage_mw", a.thr_outage_mw},
              {"target_p_out", a.target_p_out},
              {"reference_region", a.reference_region}};
}

/// Rejects keys the template does not know, recursing into objects.
void check_keys(const json& doc, const json& tmpl, const std::string& where) {
  for (const auto& [key, value] : doc.items()) {
    if (!tmpl.contains(key)) {
      throw ConfigError(fmt::format("unknown scenario key '{}{}'", where, key));
    }
    if (value.is_object() && tmpl.at(key).is_object()) {
      check_keys(value, tmpl.at(key), where + key + ".");
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("scenario key '{}{}' has the wrong type", where, key));
  }
}

Point read_point(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("x") || !j.contains("y")) {
    throw ConfigError(fmt::format("{} needs numeric x and y", where));
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "x" && key != "y" && key != "label") {
      throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
  return {get_or<double>(j, "x", 0.0, where + "."), get_or<double>(j, "y", 0.0, where + ".")};
}

json template_json() {
  json t = scenario_to_json(reference_scenario());
  t.erase("regions");
  t["regions"] = json::array();
  return t;
}

}  // namespace

json scenario_to_json(const Scenario& s) {
  json regions = json::array();
  for (const auto& r : s.topology.regions) {
    json relays = json::array();
    for (Point p : r.relays) relays.push_back(point_json(p));
    json sources = json::array();
    for (const auto& src : r.sources) {
      json j = point_json(src.pos);
      if (!src.label.empty()) j["label"] = src.label;
      sources.push_back(j);
    }
    regions.push_back(json{{"relays", relays}, {"sources", sources}});
  }
  return json{{"schema_version", s.schema_version},
              {"seed", s.seed},
              {"area", {{"width_m", s.topology.area_width_m}, {"height_m", s.topology.area_height_m}}},
              {"coordinator", point_json(s.topology.coordinator)},
              {"relay_range_m", s.topology.relay_range_m},
              {"radio", radio_json(s.topology.radio)},
              {"mac", mac_json(s.mac)},
              {"energy", energy_json(s.energy)},
              {"analysis", analysis_json(s.analysis)},
              {"run", {{"frames", s.frames}, {"trials", s.trials}}},
              {"regions", regions}};
}

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
  check_keys(doc, template_json(), "");

  Scenario s;
  const Scenario d = reference_scenario();
  s.schema_version = get_or<int>(doc, "schema_version", -1, "");
  if (s.schema_version != kScenarioSchemaVersion) {
    throw ConfigError(fmt::format("unsupported schema_version {} (expected {})", s.schema_version,
                                  kScenarioSchemaVersion));
  }
  s.seed = get_or<std::uint64_t>(doc, "seed", d.seed, "");

  auto& t = s.topology;
  const json area = doc.value("area", json::object());
  t.area_width_m = get_or<double>(area, "width_m", d.topology.area_width_m, "area.");
  t.area_height_m = get_or<double>(area, "height_m", d.topology.area_height_m, "area.");
  t.coordinator = doc.contains("coordinator") ? read_point(doc["coordinator"], "coordinator")
                                              : d.topology.coordinator;
  t.relay_range_m = get_or<double>(doc, "relay_range_m", d.topology.relay_range_m, "");

  const json radio = doc.value("radio", json::object());
  const RadioParams dr = default_radio_params();
  auto& r = t.radio;
  r.tx_power_dbm = get_or(radio, "tx_power_dbm", dr.tx_power_dbm, "radio.");
  r.sensitivity_dbm = get_or(radio, "sensitivity_dbm", dr.sensitivity_dbm, "radio.");
  r.noise_floor_dbm = get_or(radio, "noise_floor_dbm", dr.noise_floor_dbm, "radio.");
  r.data_rate_bps = get_or(radio, "data_rate_bps", dr.data_rate_bps, "radio.");
  r.base_frequency_hz = get_or(radio, "base_frequency_hz", dr.base_frequency_hz, "radio.");
  r.path_loss_exponent = get_or(radio, "path_loss_exponent", dr.path_loss_exponent, "radio.");
  r.num_subchannels = get_or(radio, "num_subchannels", dr.num_subchannels, "radio.");
  r.ref_distance_m = get_or(radio, "ref_distance_m", dr.ref_distance_m, "radio.");
  r.pl_ref_db = get_or(radio, "pl_ref_db", dr.pl_ref_db, "radio.");
  r.shadowing_sigma_db = get_or(radio, "shadowing_sigma_db", dr.shadowing_sigma_db, "radio.");
  r.delta_thr_db = get_or(radio, "delta_thr_db", dr.delta_thr_db, "radio.");

  const json mac = doc.value("mac", json::object());
  auto& m = s.mac;
  m.demod_threshold_db = get_or(mac, "demod_threshold_db", d.mac.demod_threshold_db, "mac.");
  m.max_retries = get_or(mac, "max_retries", d.mac.max_retries, "mac.");
  m.cw_init = get_or(mac, "cw_init", d.mac.cw_init, "mac.");
  m.cw_max = get_or(mac, "cw_max", d.mac.cw_max, "mac.");
  m.slot_duration_s = get_or(mac, "slot_duration_s", d.mac.slot_duration_s, "mac.");
  m.access_slots = get_or(mac, "access_slots", d.mac.access_slots, "mac.");
  m.uplink_slots = get_or(mac, "uplink_slots", d.mac.uplink_slots, "mac.");
  m.queue_limit = get_or(mac, "queue_limit", d.mac.queue_limit, "mac.");

  const json energy = doc.value("energy", json::object());
  auto& e = s.energy;
  e.p_circuit_tx_w = get_or(energy, "p_circuit_tx_w", d.energy.p_circuit_tx_w, "energy.");
  e.p_circuit_rx_w = get_or(energy, "p_circuit_rx_w", d.energy.p_circuit_rx_w, "energy.");
  e.p_idle_w = get_or(energy, "p_idle_w", d.energy.p_idle_w, "energy.");
  e.p_sense_w = get_or(energy, "p_sense_w", d.energy.p_sense_w, "energy.");
  e.tx_power_dbm = r.tx_power_dbm;

  const json analysis = doc.value("analysis", json::object());
  auto& a = s.analysis;
  a.thr_outage_mw = get_or(analysis, "thr_outage_mw", d.analysis.thr_outage_mw, "analysis.");
  a.target_p_out = get_or(analysis, "target_p_out", d.analysis.target_p_out, "analysis.");
  a.reference_region = get_or(analysis, "reference_region", d.analysis.reference_region, "analysis.");

  const json run = doc.value("run", json::object());
  s.frames = get_or(run, "frames", d.frames, "run.");
  s.trials = get_or(run, "trials", d.trials, "run.");

  if (!doc.contains("regions") || !doc["regions"].is_array()) {
    throw ConfigError("scenario needs a 'regions' list");
  }
  t.regions.clear();
  for (std::size_t i = 0; i < doc["regions"].size(); ++i) {
    const json& rj = doc["regions"][i];
    const std::string where = fmt::format("regions[{}]", i);
    if (!rj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : rj.items()) {
      if (key != "relays" && key != "sources") {
        throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
      }
    }
    RegionSpec region;
    for (std::size_t k = 0; k < rj.value("relays", json::array()).size(); ++k) {
      region.relays.push_back(read_point(rj["relays"][k], fmt::format("{}.relays[{}]", where, k)));
    }
    for (std::size_t k = 0; k < rj.value("sources", json::array()).size(); ++k) {
      const json& sj = rj["sources"][k];
      const std::string sw = fmt::format("{}.sources[{}]", where, k);
      region.sources.push_back({read_point(sj, sw), get_or<std::string>(sj, "label", "", sw + ".")});
    }
    t.regions.push_back(std::move(region));
  }

  r.validate();
  m.validate();
  e.validate();
  if (s.frames < 0) throw ConfigError("run.frames must be >= 0");
  if (s.trials < 1) throw ConfigError("run.trials must be >= 1");
  if (a.thr_outage_mw < 0) throw ConfigError("analysis.thr_outage_mw must be >= 0");
  return s;
}

std::pair<std::string, std::string> split_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  }
  return {assignment.substr(0, eq), assignment.substr(eq + 1)};
}

void apply_override(json& doc, const std::string& key, const std::string& value) {
  std::string pointer;
  std::size_t start = 0;
  while (start <= key.size()) {
    const auto dot = key.find('.', start);
    const auto part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(fmt::format("malformed override key '{}'", key));
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  const json::json_pointer ptr(pointer);

  json* target = nullptr;
  try {
    target = &doc.at(ptr);
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("override key '{}' does not exist in the scenario", key));
  }

  json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) parsed = value;
  const bool both_numbers = target->is_number() && parsed.is_number();
  if (!both_numbers && target->type() != parsed.type()) {
    throw ConfigError(fmt::format("override '{}={}' changes the value's type", key, value));
  }
  *target = parsed;
}

Scenario resolve_scenario(json doc, const std::vector<std::string>& overrides) {
  // Fill defaults first so overrides may target keys the file leaves out.
  json full = scenario_to_json(scenario_from_json(doc));
  for (const auto& o : overrides) {
    const auto [key, value] = split_override(o);
    apply_override(full, key, value);
  }
  return scenario_from_json(full);
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read scenario '{}'", path.string()));
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false, /*ignore_comments=*/true);
  if (doc.is_discarded()) throw ConfigError(fmt::format("'{}' is not valid JSON", path.string()));
  return resolve_scenario(std::move(doc), overrides);
}

}  // namespace wban
