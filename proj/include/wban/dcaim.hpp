#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "wban/random.hpp"
#include "wban/topology.hpp"

namespace wban {

/// Received power delta(i, j, k) of source k of region j at the observer of
/// region i, plus each region's weakest own link delta_min(i).
class PowerMatrix {
 public:
  PowerMatrix() = default;
  /// sources_per_region[j] = number of sources in region j.
  explicit PowerMatrix(std::vector<int> sources_per_region);

  int num_regions() const { return static_cast<int>(sources_per_region_.size()); }
  int num_sources(int region) const;

  void set(int observer_region, NodeId source, double power_dbm);
  std::optional<double> get(int observer_region, NodeId source) const;
  /// Throws IncompleteMatrixError when the entry is missing.
  double at(int observer_region, NodeId source) const;
  std::size_t size() const { return entries_.size(); }

  /// Minimum over the region's own sources. Throws IncompleteMatrixError if
  /// any own-region entry is missing.
  double min_own_dbm(int region) const;

 private:
  void check(int observer_region, NodeId source) const;

  std::vector<int> sources_per_region_;
  std::map<std::pair<int, NodeId>, double> entries_;
};

/// Measurement round: every source transmits once in its own globally
/// orthogonal slot while each region's observer relay records the power.
PowerMatrix measurement_round(const NetworkTopology& topology, RandomStream& rng);

struct InterferenceList {
  int owner = 0;
  std::set<NodeId> members;  // foreign sources only
};

struct InterferenceSet {
  int owner = 0;
  std::set<NodeId> members;  // may include the owner's own sources
};

/// Foreign sources whose power at region i exceeds
/// delta_min(i) - delta_thr_db.
InterferenceList build_interference_list(const PowerMatrix& matrix, int region,
                                         const RadioParams& radio);

/// Interference sets after a lossless broadcast of every list:
/// IS_i = IL_i  u  {(i, k) | (i, k) in IL_j, j != i}.
std::map<int, InterferenceSet> merge_interference_sets(const std::vector<InterferenceList>& lists);

/// One transmit opportunity: a (time slot, sub-channel) cell. The cell is the
/// unit of orthogonality; transmissions interfere only within the same cell.
struct SlotGrant {
  int slot = 0;
  int subchannel = 0;
  NodeId node;
  auto operator<=>(const SlotGrant&) const = default;
};

struct SlotSchedule {
  int region = 0;
  int frame_len = 0;
  std::vector<SlotGrant> grants;         // sorted by (slot, subchannel, node)
  std::set<NodeId> orthogonal_nodes;     // pinned to an exclusive cell

  /// slot index -> nodes allowed to transmit in that slot (any sub-channel)
  std::map<int, std::set<NodeId>> assignment() const;
  std::vector<SlotGrant> grants_for(NodeId node) const;
  int slot_count(NodeId node) const;
  int total_transmissions() const { return static_cast<int>(grants.size()); }
};

using ScheduleMap = std::map<int, SlotSchedule>;

/// Channel assignment. Pinned nodes (every IS member) keep their original TDMA slot and
/// take an exclusive sub-channel in it; every other cell of the frame is
/// dealt out evenly among the region's remaining sources.
/// Throws InfeasibleScheduleError when the pins of one slot exceed the
/// sub-channel count or a source would get no cell at all.
ScheduleMap assign_channels(const std::map<int, InterferenceSet>& sets,
                            const NetworkTopology& topology);

/// Scheduling core shared by both variants: explicit set of pinned sources.
ScheduleMap schedule_with_pins(const std::set<NodeId>& pinned, const NetworkTopology& topology);

/// Baseline one-slot-per-node TDMA on the shared sub-channel.
ScheduleMap original_tdma(const NetworkTopology& topology);

struct ProbabilisticAssignment {
  ScheduleMap schedules;
  std::set<NodeId> candidates;            // sources meeting the IL criterion somewhere
  std::map<NodeId, double> pin_probability;
  std::set<NodeId> pinned;
};

/// Probabilistic variant: each IL-criterion source is pinned with probability
/// min(1, delta_mW / thr_linear_mw), delta being its strongest foreign
/// measurement. Unpinned sources share cells as in assign_channels.
ProbabilisticAssignment assign_channels_probabilistic(const PowerMatrix& matrix,
                                                      const NetworkTopology& topology,
                                                      double thr_linear_mw, RandomStream& rng);

/// Measurement round, lists, sets and schedule in one go.
struct DcaimPlan {
  PowerMatrix matrix;
  std::vector<InterferenceList> lists;
  std::map<int, InterferenceSet> sets;
  ScheduleMap schedules;
};
DcaimPlan plan_dcaim(const NetworkTopology& topology, RandomStream& rng);
DcaimPlan plan_dcaim(const NetworkTopology& topology, PowerMatrix matrix);

/// Human-readable "(2,D)" style rendering with 1-based region numbers.
std::string format_member(NodeId id, const NetworkTopology& topology);
std::string format_members(const std::set<NodeId>& members, const NetworkTopology& topology);

/// Regions x slots grid; each cell lists "label@subchannel", pinned nodes
/// marked with '*'.
std::string format_schedule_grid(const ScheduleMap& schedules, const NetworkTopology& topology);

/// CSV: region,slot,subchannel,node,pinned
void write_schedule_csv(std::ostream& out, const ScheduleMap& schedules,
                        const NetworkTopology& topology);

}  // namespace wban
