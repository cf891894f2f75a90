#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wban {

/// Radio and channel parameters shared by every node except the coordinator.
struct RadioParams {
  double tx_power_dbm = -10.0;
  double sensitivity_dbm = -84.7;
  double noise_floor_dbm = -102.0;
  double data_rate_bps = 250e3;
  double base_frequency_hz = 2.4e9;
  double path_loss_exponent = 4.22;
  int num_subchannels = 8;
  double ref_distance_m = 0.1;
  double pl_ref_db = 35.2;
  double shadowing_sigma_db = 6.0;
  /// dB margin below the weakest own link used when building interference lists.
  double delta_thr_db = 10.0;

  /// Throws TopologyError naming the first violated invariant.
  void validate() const;

  bool operator==(const RadioParams&) const = default;
};

/// Table I parameters plus the modeling defaults for the values it leaves open.
RadioParams default_radio_params();

enum class NodeKind { source, relay, coordinator };

/// Identifies a node as (region, index within region, kind). The coordinator
/// lives outside every region and is NodeId::coordinator().
struct NodeId {
  int region = 0;
  int node = 0;
  NodeKind kind = NodeKind::source;

  static NodeId source(int region, int node) { return {region, node, NodeKind::source}; }
  static NodeId relay(int region, int node) { return {region, node, NodeKind::relay}; }
  static NodeId coordinator() { return {-1, 0, NodeKind::coordinator}; }

  bool is_source() const { return kind == NodeKind::source; }
  bool is_relay() const { return kind == NodeKind::relay; }
  bool is_coordinator() const { return kind == NodeKind::coordinator; }

  auto operator<=>(const NodeId&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

struct RelayRegion {
  int id = 0;
  std::vector<NodeId> relay_ids;
  std::vector<NodeId> source_ids;
  std::map<NodeId, Point> positions;
  std::map<NodeId, std::string> labels;
};

// ---------------------------------------------------------------------------
// Declarative description consumed by build_topology.

struct SourceSpec {
  Point pos;
  std::string label;  // empty -> 1-based index
};

struct RegionSpec {
  std::vector<Point> relays;
  std::vector<SourceSpec> sources;
};

struct TopologySpec {
  double area_width_m = 1.0;
  double area_height_m = 2.0;
  Point coordinator{0.5, 1.0};
  double relay_range_m = 0.5;
  RadioParams radio = default_radio_params();
  std::vector<RegionSpec> regions;
};

/// Validated, immutable WBAN layout.
class NetworkTopology {
 public:
  const std::vector<RelayRegion>& regions() const { return regions_; }
  const RelayRegion& region(int id) const;
  int num_regions() const { return static_cast<int>(regions_.size()); }
  int num_sources() const;
  int num_relays() const;
  /// Length of the shared TDMA frame: the largest source count of any region.
  int frame_len() const;

  Point coordinator_pos() const { return coordinator_pos_; }
  double area_width_m() const { return area_width_m_; }
  double area_height_m() const { return area_height_m_; }
  double relay_range_m() const { return relay_range_m_; }
  const RadioParams& radio() const { return radio_; }

  /// Every source in (region, node) order.
  std::vector<NodeId> sources() const;
  std::vector<NodeId> relays() const;
  /// The relay that performs the measurement round for a region.
  NodeId observer(int region) const;

  bool contains(NodeId id) const;
  /// Throws LookupError for ids that do not resolve.
  Point position(NodeId id) const;
  /// Display label: "1", "A", "R1", "C", ...
  std::string label(NodeId id) const;
  /// Label qualified with its region, e.g. "RG2/D".
  std::string qualified_label(NodeId id) const;

  /// Copy with a different radio configuration (for what-if runs and tests).
  NetworkTopology with_radio(const RadioParams& radio) const;

 private:
  friend NetworkTopology build_topology(const TopologySpec& spec);

  std::vector<RelayRegion> regions_;
  Point coordinator_pos_;
  double area_width_m_ = 0.0;
  double area_height_m_ = 0.0;
  double relay_range_m_ = 0.0;
  RadioParams radio_;
};

/// Validates a declarative spec and builds the topology. Throws TopologyError
/// naming the offending node on any structural violation.
NetworkTopology build_topology(const TopologySpec& spec);

/// 3 regions (chest / waist / legs) x (2 relays, 4 sources) in a 1 x 2 m area.
TopologySpec reference_topology_spec();

}  // namespace wban
