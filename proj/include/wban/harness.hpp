#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wban/analysis.hpp"
#include "wban/dcaim.hpp"
#include "wban/energy.hpp"
#include "wban/mac_sim.hpp"
#include "wban/scenario.hpp"

namespace wban {

struct RunConfig {
  std::filesystem::path scenario_path;  // empty -> built-in reference scenario
  std::vector<SchemeKind> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  std::optional<int> n_frames;
  std::optional<int> n_trials;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = "out";
  std::vector<std::string> overrides;  // "key=value"
};

/// Scenario after file, overrides and the run's seed / frames / trials.
Scenario resolve_run(const RunConfig& config);

// ---------------------------------------------------------------------------
// compare

struct SchemeResult {
  SchemeKind scheme = SchemeKind::dcaim;
  std::vector<FrameTrace> traces;
  EnergyLedger ledger;
  std::map<NodeId, double> mean_sinr_db;
  int generated = 0;
  int delivered = 0;  // at the coordinator
  int dropped = 0;
};

struct CompareResult {
  NetworkTopology topology;
  DcaimPlan plan;
  std::vector<SchemeResult> schemes;
  /// Per source: mean SINR under DCAIM minus OR (only when both ran).
  std::map<NodeId, double> sinr_delta_db;

  const SchemeResult* find(SchemeKind scheme) const;
  double mean_sinr_delta_db() const;
  /// DCAIM beats OR at every source.
  bool dcaim_sinr_wins_everywhere() const;
  /// Final WBAN energy DCAIM < OR < single-hop.
  bool energy_ordering_holds() const;
};

/// Runs the requested schemes on one topology; each scheme draws from its
/// own substream of the seed.
CompareResult compare_schemes(const Scenario& scenario, const std::vector<SchemeKind>& schemes);

/// compare_schemes plus energy.csv, sinr.csv, schedule.txt, summary.txt and
/// effective_config.json in config.out_dir.
CompareResult run_compare(const RunConfig& config);

// ---------------------------------------------------------------------------
// lemma1

/// Threshold from the scenario, or tuned to analysis.target_p_out when unset.
double outage_threshold_for(const Scenario& scenario, const NetworkTopology& topology);

/// Writes lemma1.txt, lemma1.csv and effective_config.json.
Lemma1Report run_lemma1(const RunConfig& config);

// ---------------------------------------------------------------------------
// golden

struct GoldenCheck {
  std::string name;
  bool passed = false;
  std::string expected;
  std::string actual;
};

struct GoldenReport {
  std::vector<GoldenCheck> checks;
  std::vector<std::string> notes;
  bool passed() const;
  std::string format() const;
};

/// Three regions with sources labelled 1-4, A-D and a-d.
NetworkTopology golden_topology();
/// Hand-made measurements that induce the worked example's interference lists.
PowerMatrix golden_power_matrix();
/// Looks a source up by 1-based region number and display label.
NodeId golden_node(const NetworkTopology& topology, int region_1based, const std::string& label);

GoldenReport run_golden_checks();
/// run_golden_checks, writing golden.txt when config.out_dir is set.
GoldenReport run_golden(const RunConfig& config);

// ---------------------------------------------------------------------------
// schedule

/// Measurement round + DCAIM plan; writes schedule.txt, schedule.csv and
/// effective_config.json.
DcaimPlan run_schedule(const RunConfig& config);

std::string format_plan(const DcaimPlan& plan, const NetworkTopology& topology);

}  // namespace wban
