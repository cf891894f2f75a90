#include "wban/dcaim.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "wban/channel.hpp"
#include "wban/errors.hpp"

namespace wban {

// ---------------------------------------------------------------------------
// PowerMatrix

PowerMatrix::PowerMatrix(std::vector<int> sources_per_region)
    : sources_per_region_(std::move(sources_per_region)) {
  for (int n : sources_per_region_) {
    if (n < 1) throw InputError("power matrix: every region needs at least one source");
  }
}

int PowerMatrix::num_sources(int region) const {
  if (region < 0 || region >= num_regions()) throw LookupError(fmt::format("no region {}", region));
  return sources_per_region_[static_cast<std::size_t>(region)];
}

void PowerMatrix::check(int observer_region, NodeId source) const {
  if (observer_region < 0 || observer_region >= num_regions()) {
    throw LookupError(fmt::format("power matrix: no observer region {}", observer_region));
  }
  if (!source.is_source() || source.region < 0 || source.region >= num_regions() ||
      source.node < 0 || source.node >= num_sources(source.region)) {
    throw LookupError(
        fmt::format("power matrix: ({}, {}) is not a source", source.region, source.node));
  }
}

void PowerMatrix::set(int observer_region, NodeId source, double power_dbm) {
  check(observer_region, source);
  entries_[{observer_region, source}] = power_dbm;
}

std::optional<double> PowerMatrix::get(int observer_region, NodeId source) const {
  check(observer_region, source);
  auto it = entries_.find({observer_region, source});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double PowerMatrix::at(int observer_region, NodeId source) const {
  auto v = get(observer_region, source);
  if (!v) {
    throw IncompleteMatrixError(fmt::format("power matrix: no entry for source ({}, {}) at RG{}",
                                            source.region + 1, source.node + 1,
                                            observer_region + 1));
  }
  return *v;
}

double PowerMatrix::min_own_dbm(int region) const {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < num_sources(region); ++k) m = std::min(m, at(region, NodeId::source(region, k)));
  return m;
}

PowerMatrix measurement_round(const NetworkTopology& topology, RandomStream& rng) {
  std::vector<int> counts;
  for (const auto& r : topology.regions()) counts.push_back(static_cast<int>(r.source_ids.size()));
  PowerMatrix matrix(counts);
  // One source at a time, so every observer hears it free of interference.
  for (NodeId src : topology.sources()) {
    for (int i = 0; i < topology.num_regions(); ++i) {
      matrix.set(i, src, received_power_dbm(src, topology.observer(i), topology, rng));
    }
  }
  return matrix;
}

// ---------------------------------------------------------------------------
// Interference lists and sets

InterferenceList build_interference_list(const PowerMatrix& matrix, int region,
                                         const RadioParams& radio) {
  InterferenceList il;
  il.owner = region;
  const double cutoff = matrix.min_own_dbm(region) - radio.delta_thr_db;
  for (int k = 0; k < matrix.num_regions(); ++k) {
    if (k == region) continue;
    for (int j2 = 0; j2 < matrix.num_sources(k); ++j2) {
      const NodeId src = NodeId::source(k, j2);
      if (matrix.at(region, src) > cutoff) il.members.insert(src);
    }
  }
  return il;
}

std::map<int, InterferenceSet> merge_interference_sets(const std::vector<InterferenceList>& lists) {
  std::map<int, InterferenceSet> sets;
  for (const auto& il : lists) {
    if (sets.count(il.owner)) {
      throw InputError(fmt::format("duplicate interference list for RG{}", il.owner + 1));
    }
    sets[il.owner] = InterferenceSet{il.owner, il.members};
  }
  for (const auto& il : lists) {
    for (NodeId m : il.members) {
      if (m.region == il.owner) continue;
      auto it = sets.find(m.region);
      if (it != sets.end()) it->second.members.insert(m);
    }
  }
  return sets;
}

// ---------------------------------------------------------------------------
// Schedules

std::map<int, std::set<NodeId>> SlotSchedule::assignment() const {
  std::map<int, std::set<NodeId>> out;
  for (const auto& g : grants) out[g.slot].insert(g.node);
  return out;
}

std::vector<SlotGrant> SlotSchedule::grants_for(NodeId node) const {
  std::vector<SlotGrant> out;
  for (const auto& g : grants) {
    if (g.node == node) out.push_back(g);
  }
  return out;
}

int SlotSchedule::slot_count(NodeId node) const {
  std::set<int> slots;
  for (const auto& g : grants) {
    if (g.node == node) slots.insert(g.slot);
  }
  return static_cast<int>(slots.size());
}

ScheduleMap schedule_with_pins(const std::set<NodeId>& pinned, const NetworkTopology& topology) {
  const int frame = topology.frame_len();
  const int channels = topology.radio().num_subchannels;

  ScheduleMap out;
  for (int r = 0; r < topology.num_regions(); ++r) out[r] = SlotSchedule{r, frame, {}, {}};

  // pinned_at[t][c]: an IS member owns cell (t, c) exclusively.
  std::vector<std::vector<bool>> pinned_at(static_cast<std::size_t>(frame),
                                           std::vector<bool>(static_cast<std::size_t>(channels)));
  for (NodeId node : pinned) {
    if (!node.is_source() || !topology.contains(node)) {
      throw InputError(fmt::format("pinned node ({}, {}) is not a source of this topology",
                                   node.region, node.node));
    }
    const auto t = static_cast<std::size_t>(node.node);
    auto& row = pinned_at[t];
    auto free = std::find(row.begin(), row.end(), false);
    if (free == row.end()) {
      throw InfeasibleScheduleError(fmt::format(
          "slot {} hosts more interference-set members than the {} available sub-channels",
          node.node, channels));
    }
    *free = true;
    const int c = static_cast<int>(free - row.begin());
    out[node.region].grants.push_back({node.node, c, node});
    out[node.region].orthogonal_nodes.insert(node);
  }

  // usage[t][c]: regions already reusing shared cell (t, c). Regions spread
  // over the least-used sub-channels so cells are shared only when needed.
  std::vector<std::vector<int>> usage(static_cast<std::size_t>(frame),
                                      std::vector<int>(static_cast<std::size_t>(channels), 0));
  for (int r = 0; r < topology.num_regions(); ++r) {
    std::vector<NodeId> sharing;
    for (NodeId s : topology.region(r).source_ids) {
      if (!pinned.count(s)) sharing.push_back(s);
    }
    if (sharing.empty()) continue;
    const std::size_t n = sharing.size();
    std::size_t next = 0;
    for (int t = 0; t < frame; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      std::vector<int> free;
      for (int c = 0; c < channels; ++c) {
        if (!pinned_at[ts][static_cast<std::size_t>(c)]) free.push_back(c);
      }
      std::stable_sort(free.begin(), free.end(), [&](int a, int b) {
        return usage[ts][static_cast<std::size_t>(a)] < usage[ts][static_cast<std::size_t>(b)];
      });
      const std::size_t take = std::min(free.size(), n);
      for (std::size_t i = 0; i < take; ++i) {
        const NodeId node = sharing[(next + i) % n];
        const int c = free[i];
        out[r].grants.push_back({t, c, node});
        ++usage[ts][static_cast<std::size_t>(c)];
      }
      next = (next + take) % n;
    }
    for (NodeId s : sharing) {
      if (out[r].slot_count(s) == 0) {
        throw InfeasibleScheduleError(
            fmt::format("source {} receives no free cell", topology.qualified_label(s)));
      }
    }
  }

  for (auto& [r, sched] : out) std::sort(sched.grants.begin(), sched.grants.end());
  return out;
}

ScheduleMap assign_channels(const std::map<int, InterferenceSet>& sets,
                            const NetworkTopology& topology) {
  for (int r = 0; r < topology.num_regions(); ++r) {
    if (!sets.count(r)) throw InputError(fmt::format("no interference set for RG{}", r + 1));
  }
  if (static_cast<int>(sets.size()) != topology.num_regions()) {
    throw InputError("interference sets reference regions outside the topology");
  }
  std::set<NodeId> pinned;
  for (const auto& [r, is] : sets) pinned.insert(is.members.begin(), is.members.end());
  return schedule_with_pins(pinned, topology);
}

ScheduleMap original_tdma(const NetworkTopology& topology) {
  ScheduleMap out;
  for (const auto& region : topology.regions()) {
    SlotSchedule s{region.id, topology.frame_len(), {}, {}};
    for (NodeId src : region.source_ids) s.grants.push_back({src.node, 0, src});
    out[region.id] = std::move(s);
  }
  return out;
}

ProbabilisticAssignment assign_channels_probabilistic(const PowerMatrix& matrix,
                                                      const NetworkTopology& topology,
                                                      double thr_linear_mw, RandomStream& rng) {
  if (!(thr_linear_mw > 0.0)) {
    throw DomainError(fmt::format("probabilistic threshold must be > 0 mW, got {}", thr_linear_mw));
  }
  ProbabilisticAssignment pa;
  std::map<NodeId, double> strongest_dbm;
  for (int i = 0; i < matrix.num_regions(); ++i) {
    const auto il = build_interference_list(matrix, i, topology.radio());
    for (NodeId m : il.members) {
      const double p = matrix.at(i, m);
      auto [it, inserted] = strongest_dbm.emplace(m, p);
      if (!inserted) it->second = std::max(it->second, p);
      pa.candidates.insert(m);
    }
  }
  for (const auto& [node, dbm] : strongest_dbm) {
    const double prob = std::min(1.0, dbm_to_mw(dbm) / thr_linear_mw);
    pa.pin_probability[node] = prob;
    if (rng.uniform() < prob) pa.pinned.insert(node);
  }
  pa.schedules = schedule_with_pins(pa.pinned, topology);
  return pa;
}

DcaimPlan plan_dcaim(const NetworkTopology& topology, PowerMatrix matrix) {
  DcaimPlan plan{std::move(matrix), {}, {}, {}};
  for (int i = 0; i < topology.num_regions(); ++i) {
    plan.lists.push_back(build_interference_list(plan.matrix, i, topology.radio()));
  }
  plan.sets = merge_interference_sets(plan.lists);
  plan.schedules = assign_channels(plan.sets, topology);
  return plan;
}

DcaimPlan plan_dcaim(const NetworkTopology& topology, RandomStream& rng) {
  return plan_dcaim(topology, measurement_round(topology, rng));
}

// ---------------------------------------------------------------------------
// Rendering

std::string format_member(NodeId id, const NetworkTopology& topology) {
  return fmt::format("({},{})", id.region + 1, topology.label(id));
}

std::string format_members(const std::set<NodeId>& members, const NetworkTopology& topology) {
  std::string out = "{";
  bool first = true;
  for (NodeId m : members) {
    if (!first) out += ", ";
    out += format_member(m, topology);
    first = false;
  }
  return out + "}";
}

std::string format_schedule_grid(const ScheduleMap& schedules, const NetworkTopology& topology) {
  int frame = 0;
  for (const auto& [r, s] : schedules) frame = std::max(frame, s.frame_len);

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"slot"};
  for (int t = 0; t < frame; ++t) header.push_back(std::to_string(t + 1));
  cells.push_back(header);
  for (const auto& [r, s] : schedules) {
    std::vector<std::string> row{fmt::format("RG{}", r + 1)};
    for (int t = 0; t < frame; ++t) {
      std::string cell;
      for (const auto& g : s.grants) {
        if (g.slot != t) continue;
        if (!cell.empty()) cell += ' ';
        cell += fmt::format("{}{}@{}", topology.label(g.node),
                            s.orthogonal_nodes.count(g.node) ? "*" : "", g.subchannel);
      }
      row.push_back(cell.empty() ? "-" : cell);
    }
    cells.push_back(row);
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << (c == 0 ? "" : " | ") << fmt::format("{:<{}}", row[c], width[c]);
    }
    os << '\n';
  }
  os << "label@subchannel; * = interference-set member on an exclusive cell\n";
  return os.str();
}

void write_schedule_csv(std::ostream& out, const ScheduleMap& schedules,
                        const NetworkTopology& topology) {
  out << "region,slot,subchannel,node,pinned\n";
  for (const auto& [r, s] : schedules) {
    for (const auto& g : s.grants) {
      out << r + 1 << ',' << g.slot << ',' << g.subchannel << ',' << topology.label(g.node) << ','
          << (s.orthogonal_nodes.count(g.node) ? 1 : 0) << '\n';
    }
  }
}

}  // namespace wban
