#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wban/channel.hpp"
#include "wban/dcaim.hpp"
#include "wban/random.hpp"
#include "wban/topology.hpp"

namespace wban {

enum class SchemeKind { dcaim, or_csma_two_hop, single_hop_direct };

std::string to_string(SchemeKind scheme);
/// Accepts "dcaim", "or", "or_csma_two_hop", "single_hop", "single_hop_direct".
SchemeKind parse_scheme(std::string_view name);
inline constexpr SchemeKind kAllSchemes[] = {SchemeKind::dcaim, SchemeKind::or_csma_two_hop,
                                             SchemeKind::single_hop_direct};

struct MacParams {
  double demod_threshold_db = 10.0;
  int max_retries = 3;
  int cw_init = 8;
  int cw_max = 64;
  double slot_duration_s = 0.005;
  /// Source access phase; the DCAIM frame occupies its first frame_len slots.
  int access_slots = 16;
  /// Relay -> coordinator phase (two-hop schemes only).
  int uplink_slots = 8;
  int queue_limit = 4;

  void validate() const;
  int frame_slots() const { return access_slots + uplink_slots; }
  double frame_duration_s() const { return frame_slots() * slot_duration_s; }
};

enum class Phase { access, uplink };
enum class Outcome { delivered, collided, below_sensitivity };
std::string to_string(Outcome outcome);

struct Transmission {
  Phase phase = Phase::access;
  int slot = 0;  // frame-relative; uplink slots follow the access phase
  int subchannel = 0;
  NodeId tx;
  NodeId rx;
  int packets = 1;  // airtime in packet units (relay aggregates carry several)
  SinrSample sinr;
  Outcome outcome = Outcome::delivered;
  bool retransmit_scheduled = false;
};

struct FrameTrace {
  int frame_index = 0;
  double slot_duration_s = 0.0;
  int frame_slots = 0;
  std::vector<Transmission> transmissions;
  /// Owned-but-unused DCAIM grants, charged to the listening relay.
  std::map<NodeId, int> idle_slots;
  /// Backoff slots spent carrier sensing while holding a packet.
  std::map<NodeId, int> sensing_slots;

  int generated = 0;
  int dropped_overflow = 0;
  int dropped_retries = 0;
  int delivered_to_relay = 0;
  int delivered_to_coordinator = 0;

  double frame_duration_s() const { return frame_slots * slot_duration_s; }
  /// (slot, subchannel) -> transmitters sharing that cell.
  std::map<std::pair<int, int>, std::set<NodeId>> cells() const;
  /// slot -> transmitters active in it on any sub-channel.
  std::map<int, std::set<NodeId>> slot_transmitters() const;
};

/// Slotted contention with binary exponential backoff. Every contender holds
/// one packet, picks a backoff uniformly in [0, cw); identical picks collide
/// and re-enter after the collision slot with the window doubled (capped at
/// cw_max) until max_retries is exhausted. Returns slot -> transmitter set for
/// every slot in [0, slot_budget) that carried a transmission.
std::map<int, std::set<NodeId>> contention_access(const std::set<NodeId>& contenders,
                                                  int slot_budget, RandomStream& rng,
                                                  const MacParams& mac);

/// Simulates n_frames frames. scheme == dcaim requires a schedule; the
/// baselines ignore it. Throws ConfigError on a missing or oversized schedule.
std::vector<FrameTrace> run_frames(const NetworkTopology& topology, SchemeKind scheme,
                                   const ScheduleMap* schedule, int n_frames, RandomStream& rng,
                                   const MacParams& mac = {});

/// Mean access-phase SINR (dB) of each source over all its transmissions.
std::map<NodeId, double> mean_source_sinr_db(const std::vector<FrameTrace>& traces);

/// Number of (frame, cell) occurrences in which two members of one
/// interference set transmit together.
int interference_set_violations(const std::vector<FrameTrace>& traces,
                                const std::map<int, InterferenceSet>& sets);

/// CSV: frame,slot,tx_region,tx_node,rx_node,sinr_db,outcome
void write_trace_csv(std::ostream& out, const std::vector<FrameTrace>& traces,
                     const NetworkTopology& topology);

}  // namespace wban
