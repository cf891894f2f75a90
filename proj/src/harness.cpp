#include "wban/harness.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "wban/errors.hpp"

namespace wban {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMeasurementStream = 1;
constexpr std::uint64_t kThresholdPilotStream = 2;
constexpr std::uint64_t kLemmaStream = 3;
constexpr std::uint64_t kGoldenStream = 4;
constexpr std::uint64_t kSchemeStreamBase = 100;
constexpr int kPilotTrials = 20000;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError(fmt::format("cannot create output directory '{}'", dir.string()));
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw ConfigError(fmt::format("failed writing '{}'", path.string()));
}

void write_effective_config(const fs::path& dir, const Scenario& scenario) {
  write_file(dir / "effective_config.json", scenario_to_json(scenario).dump(2) + "\n");
}

std::string fmt_opt(const std::map<NodeId, double>& m, NodeId id) {
  auto it = m.find(id);
  return it == m.end() ? "" : fmt::format("{:.4f}", it->second);
}

}  // namespace

Scenario resolve_run(const RunConfig& config) {
  Scenario s;
  if (config.scenario_path.empty()) {
    s = resolve_scenario(scenario_to_json(reference_scenario()), config.overrides);
  } else {
    s = load_scenario(config.scenario_path, config.overrides);
  }
  if (config.seed) s.seed = *config.seed;
  if (config.n_frames) {
    if (*config.n_frames < 0) throw ConfigError("--frames must be >= 0");
    s.frames = *config.n_frames;
  }
  if (config.n_trials) {
    if (*config.n_trials < 1) throw ConfigError("--trials must be >= 1");
    s.trials = *config.n_trials;
  }
  return s;
}

// ---------------------------------------------------------------------------
// compare

const SchemeResult* CompareResult::find(SchemeKind scheme) const {
  for (const auto& r : schemes) {
    if (r.scheme == scheme) return &r;
  }
  return nullptr;
}

double CompareResult::mean_sinr_delta_db() const {
  if (sinr_delta_db.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [id, d] : sinr_delta_db) sum += d;
  return sum / static_cast<double>(sinr_delta_db.size());
}

bool CompareResult::dcaim_sinr_wins_everywhere() const {
  const auto* dcaim = find(SchemeKind::dcaim);
  const auto* orr = find(SchemeKind::or_csma_two_hop);
  if (!dcaim || !orr) return false;
  for (NodeId s : topology.sources()) {
    auto d = dcaim->mean_sinr_db.find(s);
    if (d == dcaim->mean_sinr_db.end()) return false;
    auto o = orr->mean_sinr_db.find(s);
    if (o != orr->mean_sinr_db.end() && !(d->second > o->second)) return false;
  }
  return true;
}

bool CompareResult::energy_ordering_holds() const {
  const auto* a = find(SchemeKind::dcaim);
  const auto* b = find(SchemeKind::or_csma_two_hop);
  const auto* c = find(SchemeKind::single_hop_direct);
  if (!a || !b || !c) return false;
  return a->ledger.wban_total() < b->ledger.wban_total() &&
         b->ledger.wban_total() < c->ledger.wban_total();
}

CompareResult compare_schemes(const Scenario& scenario, const std::vector<SchemeKind>& schemes) {
  const NetworkTopology topology = build_topology(scenario.topology);
  const RandomStream base(scenario.seed);
  auto measurement = base.fork(kMeasurementStream);

  CompareResult result{topology, plan_dcaim(topology, measurement), {}, {}};
  EnergyModel energy = scenario.energy;
  energy.tx_power_dbm = topology.radio().tx_power_dbm;

  for (SchemeKind scheme : schemes) {
    auto rng = base.fork(kSchemeStreamBase + static_cast<std::uint64_t>(scheme));
    SchemeResult r;
    r.scheme = scheme;
    r.traces = run_frames(topology, scheme, &result.plan.schedules, scenario.frames, rng,
                          scenario.mac);
    r.ledger = EnergyLedger(topology);
    for (const auto& tr : r.traces) {
      charge_frame_in_place(r.ledger, tr, energy);
      r.generated += tr.generated;
      r.delivered += tr.delivered_to_coordinator;
      r.dropped += tr.dropped_overflow + tr.dropped_retries;
    }
    r.mean_sinr_db = mean_source_sinr_db(r.traces);
    result.schemes.push_back(std::move(r));
  }

  const auto* dcaim = result.find(SchemeKind::dcaim);
  const auto* orr = result.find(SchemeKind::or_csma_two_hop);
  if (dcaim && orr) {
    for (const auto& [id, d] : dcaim->mean_sinr_db) {
      auto o = orr->mean_sinr_db.find(id);
      if (o != orr->mean_sinr_db.end()) result.sinr_delta_db[id] = d - o->second;
    }
  }
  return result;
}

namespace {

std::string energy_csv(const CompareResult& r) {
  std::ostringstream os;
  os << "scheme,frame,time_s,node,cumulative_j,wban_cumulative_j\n";
  for (const auto& s : r.schemes) {
    std::ostringstream body;
    write_energy_csv(body, s.ledger, r.topology);
    std::istringstream lines(body.str());
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) os << to_string(s.scheme) << ',' << line << '\n';
  }
  return os.str();
}

std::string sinr_csv(const CompareResult& r) {
  static const std::map<NodeId, double> kEmpty;
  auto means = [&](SchemeKind k) -> const std::map<NodeId, double>& {
    const auto* s = r.find(k);
    return s ? s->mean_sinr_db : kEmpty;
  };
  std::ostringstream os;
  os << "region,node,label,dcaim_sinr_db,or_sinr_db,single_hop_sinr_db,delta_dcaim_or_db\n";
  for (NodeId id : r.topology.sources()) {
    os << id.region + 1 << ',' << id.node + 1 << ',' << r.topology.label(id) << ','
       << fmt_opt(means(SchemeKind::dcaim), id) << ','
       << fmt_opt(means(SchemeKind::or_csma_two_hop), id) << ','
       << fmt_opt(means(SchemeKind::single_hop_direct), id) << ',' << fmt_opt(r.sinr_delta_db, id)
       << '\n';
  }
  return os.str();
}

std::string summary_txt(const CompareResult& r, const Scenario& s) {
  std::string out;
  out += fmt::format("seed {}  frames {}  frame_duration_s {:.4f}\n\n", s.seed, s.frames,
                     s.mac.frame_duration_s());
  out += fmt::format("{:<20} {:>16} {:>10} {:>10} {:>10} {:>14}\n", "scheme", "wban_energy_j",
                     "generated", "delivered", "dropped", "mean_sinr_db");
  for (const auto& sr : r.schemes) {
    double mean = 0.0;
    for (const auto& [id, v] : sr.mean_sinr_db) mean += v;
    if (!sr.mean_sinr_db.empty()) mean /= static_cast<double>(sr.mean_sinr_db.size());
    out += fmt::format("{:<20} {:>16.9e} {:>10} {:>10} {:>10} {:>14.4f}\n", to_string(sr.scheme),
                       sr.ledger.wban_total(), sr.generated, sr.delivered, sr.dropped, mean);
  }
  out += "\nper-node mean SINR delta (DCAIM - OR), dB\n";
  for (const auto& [id, d] : r.sinr_delta_db) {
    out += fmt::format("  {:<8} {:>10.4f}\n", r.topology.qualified_label(id), d);
  }
  out += fmt::format("\nmean_sinr_delta_db        {:.4f}\n", r.mean_sinr_delta_db());
  out += fmt::format("dcaim_sinr_above_or_all   {}\n", r.dcaim_sinr_wins_everywhere());
  out += fmt::format("energy_dcaim_lt_or_lt_sh  {}\n", r.energy_ordering_holds());
  return out;
}

}  // namespace

CompareResult run_compare(const RunConfig& config) {
  const Scenario scenario = resolve_run(config);
  ensure_dir(config.out_dir);
  CompareResult r = compare_schemes(scenario, config.schemes);
  write_file(config.out_dir / "energy.csv", energy_csv(r));
  write_file(config.out_dir / "sinr.csv", sinr_csv(r));
  write_file(config.out_dir / "schedule.txt", format_plan(r.plan, r.topology));
  write_file(config.out_dir / "summary.txt", summary_txt(r, scenario));
  write_effective_config(config.out_dir, scenario);
  return r;
}

// ---------------------------------------------------------------------------
// lemma1

double outage_threshold_for(const Scenario& scenario, const NetworkTopology& topology) {
  if (scenario.analysis.thr_outage_mw > 0.0) return scenario.analysis.thr_outage_mw;
  const RandomStream base(scenario.seed);
  return tune_outage_threshold(topology, scenario.analysis.target_p_out, kPilotTrials,
                               base.fork(kThresholdPilotStream),
                               scenario.analysis.reference_region);
}

Lemma1Report run_lemma1(const RunConfig& config) {
  Scenario scenario = resolve_run(config);
  ensure_dir(config.out_dir);
  const NetworkTopology topology = build_topology(scenario.topology);
  const double thr = outage_threshold_for(scenario, topology);
  scenario.analysis.thr_outage_mw = thr;  // record the threshold actually used
  const RandomStream base(scenario.seed);
  const auto report = lemma1_check(topology, thr, scenario.trials, base.fork(kLemmaStream),
                                   scenario.analysis.reference_region);
  write_file(config.out_dir / "lemma1.txt", format_lemma1_report(report));
  std::ostringstream csv;
  write_lemma1_csv(csv, report);
  write_file(config.out_dir / "lemma1.csv", csv.str());
  write_effective_config(config.out_dir, scenario);
  return report;
}

// ---------------------------------------------------------------------------
// golden

NetworkTopology golden_topology() {
  TopologySpec spec;
  spec.area_width_m = 1.0;
  spec.area_height_m = 2.0;
  spec.coordinator = {0.5, 1.0};
  spec.relay_range_m = 0.5;
  const Point centres[] = {{0.3, 1.5}, {0.5, 1.0}, {0.7, 0.5}};
  const char* labels[3][4] = {{"1", "2", "3", "4"}, {"A", "B", "C", "D"}, {"a", "b", "c", "d"}};
  for (int r = 0; r < 3; ++r) {
    RegionSpec region;
    const Point c = centres[r];
    region.relays = {c};
    const Point offsets[] = {{-0.1, 0.1}, {0.1, 0.1}, {-0.1, -0.1}, {0.1, -0.1}};
    for (int k = 0; k < 4; ++k) {
      region.sources.push_back({{c.x + offsets[k].x, c.y + offsets[k].y}, labels[r][k]});
    }
    spec.regions.push_back(region);
  }
  return build_topology(spec);
}

PowerMatrix golden_power_matrix() {
  // Own links -60..-66 dBm, so with the default 10 dB margin a foreign source
  // is listed when it arrives above -76 dBm. Listed sources arrive at -70,
  // everything else at -90.
  PowerMatrix m({4, 4, 4});
  const std::set<std::pair<int, int>> listed[3] = {
      {{1, 3}, {2, 3}},          // RG1 hears D and d
      {{0, 1}, {0, 3}, {2, 3}},  // RG2 hears 2, 4 and d
      {{1, 2}},                  // RG3 hears C
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 4; ++k) {
        double p = -90.0;
        if (i == j) {
          p = -60.0 - 2.0 * k;
        } else if (listed[i].count({j, k})) {
          p = -70.0;
        }
        m.set(i, NodeId::source(j, k), p);
      }
    }
  }
  return m;
}

NodeId golden_node(const NetworkTopology& topology, int region_1based, const std::string& label) {
  const auto& region = topology.region(region_1based - 1);
  for (NodeId s : region.source_ids) {
    if (topology.label(s) == label) return s;
  }
  throw LookupError(fmt::format("no source '{}' in RG{}", label, region_1based));
}

bool GoldenReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::string GoldenReport::format() const {
  std::string out;
  for (const auto& c : checks) {
    out += fmt::format("[{}] {}\n", c.passed ? "PASS" : "FAIL", c.name);
    if (!c.passed || !c.expected.empty()) {
      out += fmt::format("       expected {}\n       actual   {}\n", c.expected, c.actual);
    }
  }
  for (const auto& n : notes) out += fmt::format("note: {}\n", n);
  out += fmt::format("golden: {}\n", passed() ? "PASS" : "FAIL");
  return out;
}

GoldenReport run_golden_checks() {
  const NetworkTopology topo = golden_topology();
  const DcaimPlan plan = plan_dcaim(topo, golden_power_matrix());
  GoldenReport rep;

  auto node = [&](int region, const char* label) { return golden_node(topo, region, label); };
  auto set_check = [&](std::string name, const std::set<NodeId>& expected,
                       const std::set<NodeId>& actual) {
    rep.checks.push_back({std::move(name), expected == actual, format_members(expected, topo),
                          format_members(actual, topo)});
  };

  set_check("IL1 = {(2,D), (3,d)}", {node(2, "D"), node(3, "d")}, plan.lists[0].members);
  set_check("IL2 = {(1,2), (1,4), (3,d)}", {node(1, "2"), node(1, "4"), node(3, "d")},
            plan.lists[1].members);
  set_check("IL3 = {(2,C)}", {node(2, "C")}, plan.lists[2].members);

  const std::set<NodeId> is1_formula{node(2, "D"), node(3, "d"), node(1, "2"), node(1, "4")};
  const std::set<NodeId> is1_printed{node(2, "D"), node(3, "d"), node(1, "2")};
  set_check("IS1 = IL1 u {(1,k) in IL2, IL3} (union formula)", is1_formula,
            plan.sets.at(0).members);
  if (plan.sets.at(0).members != is1_printed) {
    rep.notes.push_back(fmt::format(
        "erratum: the worked example prints IS1 = {}; the union formula also admits (1,4) "
        "because (1,4) is in IL2",
        format_members(is1_printed, topo)));
  }
  set_check("IS2 = {(1,2), (1,4), (3,d), (2,C), (2,D)}",
            {node(1, "2"), node(1, "4"), node(3, "d"), node(2, "C"), node(2, "D")},
            plan.sets.at(1).members);
  set_check("IS3 = {(2,C), (3,d)}", {node(2, "C"), node(3, "d")}, plan.sets.at(2).members);

  const int slots_node1 = plan.schedules.at(0).slot_count(node(1, "1"));
  rep.checks.push_back({"node 1 of RG1 holds all 4 slots of the frame", slots_node1 == 4, "4",
                        std::to_string(slots_node1)});

  int total = 0;
  for (const auto& [r, s] : plan.schedules) total += s.total_transmissions();
  const int baseline = topo.num_sources();
  rep.checks.push_back({"scheduled transmissions exceed one-slot-per-node TDMA", total > baseline,
                        fmt::format("> {}", baseline), std::to_string(total)});

  // Static check on the schedule: no cell carries two members of one IS.
  int static_violations = 0;
  std::map<std::pair<int, int>, std::set<NodeId>> cells;
  for (const auto& [r, s] : plan.schedules) {
    for (const auto& g : s.grants) cells[{g.slot, g.subchannel}].insert(g.node);
  }
  for (const auto& [cell, nodes] : cells) {
    for (const auto& [owner, is] : plan.sets) {
      int members = 0;
      for (NodeId n : nodes) members += static_cast<int>(is.members.count(n));
      if (members >= 2) ++static_violations;
    }
  }
  rep.checks.push_back({"schedule keeps IS members on separate cells", static_violations == 0, "0",
                        std::to_string(static_violations)});

  RandomStream rng = RandomStream(0).fork(kGoldenStream);
  const auto traces = run_frames(topo, SchemeKind::dcaim, &plan.schedules, 50, rng);
  const int executed = interference_set_violations(traces, plan.sets);
  rep.checks.push_back({"executed frames never overlap IS members (50 frames)", executed == 0, "0",
                        std::to_string(executed)});
  return rep;
}

GoldenReport run_golden(const RunConfig& config) {
  GoldenReport rep = run_golden_checks();
  if (!config.out_dir.empty()) {
    ensure_dir(config.out_dir);
    write_file(config.out_dir / "golden.txt", rep.format());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// schedule

std::string format_plan(const DcaimPlan& plan, const NetworkTopology& topology) {
  std::string out;
  for (const auto& il : plan.lists) {
    out += fmt::format("IL{} = {}\n", il.owner + 1, format_members(il.members, topology));
  }
  for (const auto& [r, is] : plan.sets) {
    out += fmt::format("IS{} = {}\n", r + 1, format_members(is.members, topology));
  }
  out += "\n" + format_schedule_grid(plan.schedules, topology);
  return out;
}

DcaimPlan run_schedule(const RunConfig& config) {
  const Scenario scenario = resolve_run(config);
  ensure_dir(config.out_dir);
  const NetworkTopology topology = build_topology(scenario.topology);
  auto rng = RandomStream(scenario.seed).fork(kMeasurementStream);
  DcaimPlan plan = plan_dcaim(topology, rng);
  write_file(config.out_dir / "schedule.txt", format_plan(plan, topology));
  std::ostringstream csv;
  write_schedule_csv(csv, plan.schedules, topology);
  write_file(config.out_dir / "schedule.csv", csv.str());
  write_effective_config(config.out_dir, scenario);
  return plan;
}

}  // namespace wban
