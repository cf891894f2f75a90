#include "wban/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "wban/errors.hpp"

namespace wban {

void RadioParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(finite(tx_power_dbm) && finite(sensitivity_dbm) && finite(noise_floor_dbm) &&
        finite(pl_ref_db) && finite(delta_thr_db))) {
    throw TopologyError("radio: non-finite parameter");
  }
  if (!(sensitivity_dbm > noise_floor_dbm)) {
    throw TopologyError(fmt::format("radio: sensitivity {} dBm must exceed noise floor {} dBm",
                                    sensitivity_dbm, noise_floor_dbm));
  }
  if (!(path_loss_exponent > 0.0)) throw TopologyError("radio: path_loss_exponent must be > 0");
  if (num_subchannels < 1) throw TopologyError("radio: num_subchannels must be >= 1");
  if (!(data_rate_bps > 0.0)) throw TopologyError("radio: data_rate_bps must be > 0");
  if (!(ref_distance_m > 0.0)) throw TopologyError("radio: ref_distance_m must be > 0");
  if (!(shadowing_sigma_db >= 0.0)) throw TopologyError("radio: shadowing_sigma_db must be >= 0");
  if (!(delta_thr_db >= 0.0)) throw TopologyError("radio: delta_thr_db must be >= 0");
}

RadioParams default_radio_params() { return RadioParams{}; }

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

const RelayRegion& NetworkTopology::region(int id) const {
  if (id < 0 || id >= num_regions()) throw LookupError(fmt::format("no region {}", id));
  return regions_[static_cast<std::size_t>(id)];
}

int NetworkTopology::num_sources() const {
  int n = 0;
  for (const auto& r : regions_) n += static_cast<int>(r.source_ids.size());
  return n;
}

int NetworkTopology::num_relays() const {
  int n = 0;
  for (const auto& r : regions_) n += static_cast<int>(r.relay_ids.size());
  return n;
}

int NetworkTopology::frame_len() const {
  int n = 0;
  for (const auto& r : regions_) n = std::max(n, static_cast<int>(r.source_ids.size()));
  return n;
}

std::vector<NodeId> NetworkTopology::sources() const {
  std::vector<NodeId> out;
  for (const auto& r : regions_) out.insert(out.end(), r.source_ids.begin(), r.source_ids.end());
  return out;
}

std::vector<NodeId> NetworkTopology::relays() const {
  std::vector<NodeId> out;
  for (const auto& r : regions_) out.insert(out.end(), r.relay_ids.begin(), r.relay_ids.end());
  return out;
}

NodeId NetworkTopology::observer(int region_id) const { return region(region_id).relay_ids.front(); }

bool NetworkTopology::contains(NodeId id) const {
  if (id.is_coordinator()) return id == NodeId::coordinator();
  if (id.region < 0 || id.region >= num_regions()) return false;
  return regions_[static_cast<std::size_t>(id.region)].positions.count(id) > 0;
}

Point NetworkTopology::position(NodeId id) const {
  if (id.is_coordinator()) {
    if (id != NodeId::coordinator()) throw LookupError("malformed coordinator id");
    return coordinator_pos_;
  }
  if (id.region < 0 || id.region >= num_regions()) {
    throw LookupError(fmt::format("node ({}, {}) references missing region", id.region, id.node));
  }
  const auto& r = regions_[static_cast<std::size_t>(id.region)];
  auto it = r.positions.find(id);
  if (it == r.positions.end()) {
    throw LookupError(fmt::format("node ({}, {}) not in region {}", id.region, id.node, id.region));
  }
  return it->second;
}

std::string NetworkTopology::label(NodeId id) const {
  if (id.is_coordinator()) return "C";
  const auto& r = region(id.region);
  auto it = r.labels.find(id);
  if (it == r.labels.end()) {
    throw LookupError(fmt::format("node ({}, {}) not in region {}", id.region, id.node, id.region));
  }
  return it->second;
}

std::string NetworkTopology::qualified_label(NodeId id) const {
  if (id.is_coordinator()) return "C";
  return fmt::format("RG{}/{}", id.region + 1, label(id));
}

NetworkTopology NetworkTopology::with_radio(const RadioParams& radio) const {
  radio.validate();
  NetworkTopology copy = *this;
  copy.radio_ = radio;
  return copy;
}

NetworkTopology build_topology(const TopologySpec& spec) {
  spec.radio.validate();
  if (!(spec.area_width_m > 0.0 && spec.area_height_m > 0.0)) {
    throw TopologyError("area dimensions must be positive");
  }
  if (!(spec.relay_range_m > 0.0)) throw TopologyError("relay range must be positive");
  if (spec.regions.empty()) throw TopologyError("topology needs at least one region");

  auto inside = [&](Point p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.y >= 0.0 &&
           p.x <= spec.area_width_m && p.y <= spec.area_height_m;
  };
  auto where = [](Point p) { return fmt::format("({:.3f}, {:.3f})", p.x, p.y); };

  if (!inside(spec.coordinator)) {
    throw TopologyError(fmt::format("coordinator C at {} lies outside the {} x {} m area",
                                    where(spec.coordinator), spec.area_width_m, spec.area_height_m));
  }

  NetworkTopology topo;
  topo.coordinator_pos_ = spec.coordinator;
  topo.area_width_m_ = spec.area_width_m;
  topo.area_height_m_ = spec.area_height_m;
  topo.relay_range_m_ = spec.relay_range_m;
  topo.radio_ = spec.radio;

  for (std::size_t ri = 0; ri < spec.regions.size(); ++ri) {
    const auto& rs = spec.regions[ri];
    const int rid = static_cast<int>(ri);
    RelayRegion region;
    region.id = rid;
    if (rs.relays.empty()) throw TopologyError(fmt::format("RG{} has no relay", rid + 1));
    if (rs.sources.empty()) throw TopologyError(fmt::format("RG{} has no source", rid + 1));

    std::set<std::string> seen;
    for (std::size_t k = 0; k < rs.relays.size(); ++k) {
      const NodeId id = NodeId::relay(rid, static_cast<int>(k));
      const std::string lbl = fmt::format("R{}", k + 1);
      if (!inside(rs.relays[k])) {
        throw TopologyError(fmt::format("relay RG{}/{} at {} lies outside the area", rid + 1, lbl,
                                        where(rs.relays[k])));
      }
      region.relay_ids.push_back(id);
      region.positions[id] = rs.relays[k];
      region.labels[id] = lbl;
      seen.insert(lbl);
    }
    for (std::size_t k = 0; k < rs.sources.size(); ++k) {
      const auto& ss = rs.sources[k];
      const NodeId id = NodeId::source(rid, static_cast<int>(k));
      const std::string lbl = ss.label.empty() ? std::to_string(k + 1) : ss.label;
      if (!seen.insert(lbl).second) {
        throw TopologyError(fmt::format("duplicate node id RG{}/{}", rid + 1, lbl));
      }
      if (!inside(ss.pos)) {
        throw TopologyError(fmt::format("source RG{}/{} at {} lies outside the area", rid + 1, lbl,
                                        where(ss.pos)));
      }
      double nearest = std::numeric_limits<double>::infinity();
      for (Point relay : rs.relays) nearest = std::min(nearest, distance(relay, ss.pos));
      if (nearest > spec.relay_range_m) {
        throw TopologyError(fmt::format(
            "source RG{}/{} at {} is {:.3f} m from its nearest relay (range {:.3f} m)", rid + 1,
            lbl, where(ss.pos), nearest, spec.relay_range_m));
      }
      region.source_ids.push_back(id);
      region.positions[id] = ss.pos;
      region.labels[id] = lbl;
    }
    topo.regions_.push_back(std::move(region));
  }
  return topo;
}

TopologySpec reference_topology_spec() {
  // Chest, waist and legs stacked along the 2 m body axis. The first relay of
  // each region sits at its centre; the second is offset toward the
  // coordinator on the right hip.
  TopologySpec spec;
  spec.area_width_m = 1.0;
  spec.area_height_m = 2.0;
  spec.coordinator = {0.8, 1.0};
  spec.relay_range_m = 0.5;
  spec.radio = default_radio_params();

  const double centres_y[] = {1.55, 1.0, 0.45};
  for (double cy : centres_y) {
    RegionSpec r;
    const double cx = 0.5;
    r.relays = {{cx, cy}, {cx + 0.15, cy + (1.0 - cy) * 0.3}};
    r.sources = {{{cx - 0.15, cy + 0.15}, ""},
                 {{cx + 0.15, cy + 0.15}, ""},
                 {{cx - 0.15, cy - 0.15}, ""},
                 {{cx + 0.15, cy - 0.15}, ""}};
    spec.regions.push_back(r);
  }
  return spec;
}

}  // namespace wban
