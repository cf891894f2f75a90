#include "wban/mac_sim.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>

#include "wban/errors.hpp"

namespace wban {

std::string to_string(SchemeKind scheme) {
  switch (scheme) {
    case SchemeKind::dcaim: return "dcaim";
    case SchemeKind::or_csma_two_hop: return "or_csma_two_hop";
    case SchemeKind::single_hop_direct: return "single_hop_direct";
  }
  return "?";
}

SchemeKind parse_scheme(std::string_view name) {
  if (name == "dcaim") return SchemeKind::dcaim;
  if (name == "or" || name == "or_csma_two_hop") return SchemeKind::or_csma_two_hop;
  if (name == "single_hop" || name == "single_hop_direct") return SchemeKind::single_hop_direct;
  throw ConfigError(fmt::format("unknown scheme '{}'", name));
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::delivered: return "delivered";
    case Outcome::collided: return "collided";
    case Outcome::below_sensitivity: return "below_sensitivity";
  }
  return "?";
}

void MacParams::validate() const {
  if (max_retries < 0) throw ConfigError("mac.max_retries must be >= 0");
  if (cw_init < 1 || cw_max < cw_init) throw ConfigError("mac: need 1 <= cw_init <= cw_max");
  if (!(slot_duration_s > 0.0)) throw ConfigError("mac.slot_duration_s must be > 0");
  if (access_slots < 1 || uplink_slots < 1) throw ConfigError("mac: phases need >= 1 slot");
  if (queue_limit < 1) throw ConfigError("mac.queue_limit must be >= 1");
}

std::map<std::pair<int, int>, std::set<NodeId>> FrameTrace::cells() const {
  std::map<std::pair<int, int>, std::set<NodeId>> out;
  for (const auto& t : transmissions) out[{t.slot, t.subchannel}].insert(t.tx);
  return out;
}

std::map<int, std::set<NodeId>> FrameTrace::slot_transmitters() const {
  std::map<int, std::set<NodeId>> out;
  for (const auto& t : transmissions) out[t.slot].insert(t.tx);
  return out;
}

// ---------------------------------------------------------------------------
// Contention

namespace {

/// Per-contender backoff state. next_slot is relative to the start of the
/// current phase; -1 means not contending.
struct Backoff {
  int cw = 0;
  int next_slot = -1;
  int retries = 0;

  bool armed() const { return next_slot >= 0; }
  void arm(int from_slot, RandomStream& rng) { next_slot = from_slot + rng.uniform_int(0, cw); }
};

}  // namespace

std::map<int, std::set<NodeId>> contention_access(const std::set<NodeId>& contenders,
                                                  int slot_budget, RandomStream& rng,
                                                  const MacParams& mac) {
  std::map<NodeId, Backoff> state;
  for (NodeId c : contenders) {
    Backoff b{mac.cw_init, -1, 0};
    b.arm(0, rng);
    state.emplace(c, b);
  }
  std::map<int, std::set<NodeId>> out;
  for (int t = 0; t < slot_budget; ++t) {
    std::set<NodeId> tx;
    for (const auto& [id, b] : state) {
      if (b.next_slot == t) tx.insert(id);
    }
    if (tx.empty()) continue;
    out[t] = tx;
    for (NodeId id : tx) {
      auto& b = state[id];
      if (tx.size() == 1 || ++b.retries > mac.max_retries) {
        b.next_slot = -1;
        continue;
      }
      b.cw = std::min(2 * b.cw, mac.cw_max);
      b.arm(t + 1, rng);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frame simulator

namespace {

struct Packet {
  int retries = 0;
};

class Simulator {
 public:
  Simulator(const NetworkTopology& topology, SchemeKind scheme, const ScheduleMap* schedule,
            RandomStream& rng, const MacParams& mac)
      : topo_(topology), scheme_(scheme), schedule_(schedule), rng_(rng), mac_(mac) {
    for (NodeId s : topo_.sources()) {
      queues_[s];
      backoff_[s] = Backoff{mac_.cw_init, -1, 0};
    }
    for (NodeId r : topo_.relays()) {
      relay_buffer_[r] = 0;
      backoff_[r] = Backoff{mac_.cw_init, -1, 0};
    }
  }

  FrameTrace run_frame(int index) {
    FrameTrace trace;
    trace.frame_index = index;
    trace.slot_duration_s = mac_.slot_duration_s;
    trace.frame_slots = mac_.frame_slots();

    for (auto& [src, q] : queues_) {
      ++trace.generated;
      if (static_cast<int>(q.size()) >= mac_.queue_limit) {
        ++trace.dropped_overflow;
      } else {
        q.push_back(Packet{});
      }
    }

    if (scheme_ == SchemeKind::dcaim) {
      scheduled_access(trace);
    } else {
      contention_phase(trace);
    }
    if (scheme_ != SchemeKind::single_hop_direct) uplink_phase(trace);
    return trace;
  }

 private:
  struct Pending {
    NodeId tx;
    NodeId rx;
    int subchannel;
    int packets;
  };

  /// Evaluates every transmission that starts in one slot against the others
  /// sharing its cell.
  std::vector<Transmission> evaluate(Phase phase, int slot, const std::vector<Pending>& pending) {
    std::map<int, std::set<NodeId>> by_channel;
    for (const auto& p : pending) by_channel[p.subchannel].insert(p.tx);

    std::vector<Transmission> out;
    for (const auto& p : pending) {
      std::set<NodeId> others = by_channel[p.subchannel];
      others.erase(p.tx);
      Transmission t;
      t.phase = phase;
      t.slot = slot;
      t.subchannel = p.subchannel;
      t.tx = p.tx;
      t.rx = p.rx;
      t.packets = p.packets;
      t.sinr = sinr_at(p.rx, p.tx, others, topo_, rng_);
      if (t.sinr.signal_dbm < topo_.radio().sensitivity_dbm) {
        t.outcome = Outcome::below_sensitivity;
      } else if (t.sinr.sinr_db < mac_.demod_threshold_db) {
        t.outcome = Outcome::collided;
      } else {
        t.outcome = Outcome::delivered;
      }
      out.push_back(t);
    }
    return out;
  }

  /// Applies a source transmission's outcome to its queue. Returns true when
  /// the packet is still queued for another attempt.
  bool settle_source(Transmission& t, FrameTrace& trace) {
    auto& q = queues_[t.tx];
    if (t.outcome == Outcome::delivered) {
      q.pop_front();
      if (t.rx.is_relay()) {
        ++relay_buffer_[t.rx];
        ++trace.delivered_to_relay;
      } else {
        ++trace.delivered_to_coordinator;
      }
      return false;
    }
    if (++q.front().retries > mac_.max_retries) {
      q.pop_front();
      ++trace.dropped_retries;
      return false;
    }
    t.retransmit_scheduled = true;
    return true;
  }

  void scheduled_access(FrameTrace& trace) {
    if (!schedule_) throw ConfigError("dcaim scheme requires a slot schedule");
    std::vector<std::vector<std::pair<SlotGrant, int>>> by_slot(
        static_cast<std::size_t>(mac_.access_slots));
    for (const auto& [region, sched] : *schedule_) {
      if (sched.frame_len > mac_.access_slots) {
        throw ConfigError(fmt::format("schedule frame of {} slots exceeds the {}-slot access phase",
                                      sched.frame_len, mac_.access_slots));
      }
      for (const auto& g : sched.grants) by_slot[static_cast<std::size_t>(g.slot)].push_back({g, region});
    }
    for (int t = 0; t < mac_.access_slots; ++t) {
      std::vector<Pending> pending;
      for (const auto& [g, region] : by_slot[static_cast<std::size_t>(t)]) {
        const NodeId relay = topo_.observer(region);
        if (queues_.at(g.node).empty()) {
          ++trace.idle_slots[relay];
        } else {
          pending.push_back({g.node, relay, g.subchannel, 1});
        }
      }
      for (auto& tx : evaluate(Phase::access, t, pending)) {
        settle_source(tx, trace);
        trace.transmissions.push_back(tx);
      }
    }
  }

  NodeId best_relay(NodeId src) {
    const auto& relays = topo_.region(src.region).relay_ids;
    NodeId best = relays.front();
    double best_dbm = -std::numeric_limits<double>::infinity();
    for (NodeId r : relays) {
      const double p = received_power_dbm(src, r, topo_, rng_);
      if (p > best_dbm) {
        best_dbm = p;
        best = r;
      }
    }
    return best;
  }

  void after_attempt(NodeId id, bool still_queued, bool success, bool has_more, int slot) {
    auto& b = backoff_[id];
    if (success || !still_queued) {
      b.cw = mac_.cw_init;
    } else {
      b.cw = std::min(2 * b.cw, mac_.cw_max);
    }
    b.next_slot = -1;
    if (has_more) b.arm(slot + 1, rng_);
  }

  void contention_phase(FrameTrace& trace) {
    std::map<NodeId, NodeId> target;
    for (const auto& [src, q] : queues_) {
      target[src] = scheme_ == SchemeKind::or_csma_two_hop ? best_relay(src) : NodeId::coordinator();
      auto& b = backoff_[src];
      if (!q.empty() && !b.armed()) b.arm(0, rng_);
    }
    // Without a relay uplink the direct scheme contends for the whole frame.
    const int slots =
        scheme_ == SchemeKind::single_hop_direct ? mac_.frame_slots() : mac_.access_slots;
    for (int t = 0; t < slots; ++t) {
      std::vector<Pending> pending;
      for (const auto& [src, q] : queues_) {
        const auto& b = backoff_[src];
        if (!b.armed() || q.empty()) continue;
        if (b.next_slot == t) {
          pending.push_back({src, target[src], 0, 1});
        } else {
          ++trace.sensing_slots[src];
        }
      }
      for (auto& tx : evaluate(Phase::access, t, pending)) {
        const bool again = settle_source(tx, trace);
        after_attempt(tx.tx, again, tx.outcome == Outcome::delivered, !queues_[tx.tx].empty(), t);
        trace.transmissions.push_back(tx);
      }
    }
    carry_over(slots, topo_.sources());
  }

  void uplink_phase(FrameTrace& trace) {
    const auto relays = topo_.relays();
    for (NodeId r : relays) {
      auto& b = backoff_[r];
      if (relay_buffer_[r] > 0 && !b.armed()) b.arm(0, rng_);
    }
    const int base = mac_.access_slots;
    for (int u = 0; u < mac_.uplink_slots; ++u) {
      std::vector<Pending> pending;
      for (NodeId r : relays) {
        const auto& b = backoff_[r];
        if (!b.armed() || relay_buffer_[r] == 0) continue;
        if (b.next_slot == u) {
          pending.push_back({r, NodeId::coordinator(), 0, relay_buffer_[r]});
        } else {
          ++trace.sensing_slots[r];
        }
      }
      for (auto& tx : evaluate(Phase::uplink, base + u, pending)) {
        auto& b = backoff_[tx.tx];
        bool delivered = tx.outcome == Outcome::delivered;
        if (delivered) {
          trace.delivered_to_coordinator += relay_buffer_[tx.tx];
          relay_buffer_[tx.tx] = 0;
          b.retries = 0;
        } else if (++b.retries > mac_.max_retries) {
          trace.dropped_retries += relay_buffer_[tx.tx];
          relay_buffer_[tx.tx] = 0;
          b.retries = 0;
        } else {
          tx.retransmit_scheduled = true;
        }
        after_attempt(tx.tx, tx.retransmit_scheduled, delivered, relay_buffer_[tx.tx] > 0, u);
        trace.transmissions.push_back(tx);
      }
    }
    carry_over(mac_.uplink_slots, relays);
  }

  void carry_over(int phase_len, const std::vector<NodeId>& ids) {
    for (NodeId id : ids) {
      auto& b = backoff_[id];
      if (b.armed()) b.next_slot -= phase_len;
    }
  }

  const NetworkTopology& topo_;
  SchemeKind scheme_;
  const ScheduleMap* schedule_;
  RandomStream& rng_;
  MacParams mac_;
  std::map<NodeId, std::deque<Packet>> queues_;
  std::map<NodeId, int> relay_buffer_;
  std::map<NodeId, Backoff> backoff_;
};

}  // namespace

std::vector<FrameTrace> run_frames(const NetworkTopology& topology, SchemeKind scheme,
                                   const ScheduleMap* schedule, int n_frames, RandomStream& rng,
                                   const MacParams& mac) {
  mac.validate();
  if (scheme == SchemeKind::dcaim && !schedule) {
    throw ConfigError("dcaim scheme requires a slot schedule");
  }
  std::vector<FrameTrace> traces;
  if (n_frames <= 0) return traces;
  Simulator sim(topology, scheme, scheme == SchemeKind::dcaim ? schedule : nullptr, rng, mac);
  traces.reserve(static_cast<std::size_t>(n_frames));
  for (int f = 0; f < n_frames; ++f) traces.push_back(sim.run_frame(f));
  return traces;
}

std::map<NodeId, double> mean_source_sinr_db(const std::vector<FrameTrace>& traces) {
  std::map<NodeId, std::pair<double, int>> acc;
  for (const auto& tr : traces) {
    for (const auto& t : tr.transmissions) {
      if (t.phase != Phase::access || !t.tx.is_source()) continue;
      auto& [sum, n] = acc[t.tx];
      sum += t.sinr.sinr_db;
      ++n;
    }
  }
  std::map<NodeId, double> out;
  for (const auto& [id, a] : acc) out[id] = a.first / a.second;
  return out;
}

int interference_set_violations(const std::vector<FrameTrace>& traces,
                                const std::map<int, InterferenceSet>& sets) {
  int violations = 0;
  for (const auto& tr : traces) {
    for (const auto& [cell, txs] : tr.cells()) {
      for (const auto& [owner, is] : sets) {
        int members = 0;
        for (NodeId n : txs) members += static_cast<int>(is.members.count(n));
        if (members >= 2) ++violations;
      }
    }
  }
  return violations;
}

void write_trace_csv(std::ostream& out, const std::vector<FrameTrace>& traces,
                     const NetworkTopology& topology) {
  out << "frame,slot,tx_region,tx_node,rx_node,sinr_db,outcome\n";
  for (const auto& tr : traces) {
    for (const auto& t : tr.transmissions) {
      out << fmt::format("{},{},{},{},{},{:.6f},{}\n", tr.frame_index, t.slot, t.tx.region + 1,
                         topology.label(t.tx), topology.label(t.rx), t.sinr.sinr_db,
                         to_string(t.outcome));
    }
  }
}

}  // namespace wban
