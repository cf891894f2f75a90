#include "wban/energy.hpp"

#include <set>
#include <tuple>

#include <fmt/format.h>

#include "wban/channel.hpp"
#include "wban/errors.hpp"

namespace wban {

void EnergyModel::validate() const {
  if (p_circuit_tx_w < 0 || p_circuit_rx_w < 0 || p_idle_w < 0 || p_sense_w < 0) {
    throw ConfigError("energy: powers must be non-negative");
  }
}

double EnergyModel::tx_joules(double slot_s, int packets) const {
  return (dbm_to_mw(tx_power_dbm) * 1e-3 + p_circuit_tx_w) * slot_s * packets;
}

double EnergyModel::rx_joules(double slot_s, int packets) const {
  return p_circuit_rx_w * slot_s * packets;
}

EnergyLedger::EnergyLedger(const NetworkTopology& topology) {
  for (NodeId s : topology.sources()) totals_[s] = 0.0;
  for (NodeId r : topology.relays()) totals_[r] = 0.0;
  totals_[NodeId::coordinator()] = 0.0;
}

double EnergyLedger::node_total(NodeId id) const {
  auto it = totals_.find(id);
  if (it == totals_.end()) throw LookupError("energy ledger: unknown node");
  return it->second;
}

double EnergyLedger::wban_total() const {
  double sum = 0.0;
  for (const auto& [id, j] : totals_) {
    if (!id.is_coordinator()) sum += j;
  }
  return sum;
}

void EnergyLedger::add(NodeId id, double joules) {
  auto it = totals_.find(id);
  if (it == totals_.end()) throw LookupError("energy ledger: unknown node");
  it->second += joules;
}

void EnergyLedger::close_frame(int frame, double time_s) {
  history_.push_back(Snapshot{frame, time_s, totals_, wban_total()});
  next_frame_ = frame + 1;
}

void charge_frame_in_place(EnergyLedger& ledger, const FrameTrace& trace, const EnergyModel& model) {
  if (trace.frame_index != ledger.next_frame()) {
    throw SequenceError(fmt::format("energy ledger expects frame {}, got frame {}",
                                    ledger.next_frame(), trace.frame_index));
  }
  const double slot = trace.slot_duration_s;
  // One reception per busy (receiver, slot, sub-channel); a collision is
  // still a single listening interval at the receiver.
  std::map<std::tuple<NodeId, int, int>, int> receptions;
  for (const auto& t : trace.transmissions) {
    ledger.add(t.tx, model.tx_joules(slot, t.packets));
    auto& longest = receptions[{t.rx, t.slot, t.subchannel}];
    longest = std::max(longest, t.packets);
  }
  for (const auto& [key, packets] : receptions) {
    ledger.add(std::get<0>(key), model.rx_joules(slot, packets));
  }
  for (const auto& [id, n] : trace.idle_slots) ledger.add(id, model.p_idle_w * slot * n);
  for (const auto& [id, n] : trace.sensing_slots) ledger.add(id, model.p_sense_w * slot * n);
  ledger.close_frame(trace.frame_index, (trace.frame_index + 1) * trace.frame_duration_s());
}

EnergyLedger charge_frame(EnergyLedger ledger, const FrameTrace& trace, const EnergyModel& model) {
  charge_frame_in_place(ledger, trace, model);
  return ledger;
}

void write_energy_csv(std::ostream& out, const EnergyLedger& ledger, const NetworkTopology& topology) {
  out << "frame,time_s,node,cumulative_j,wban_cumulative_j\n";
  for (const auto& snap : ledger.history()) {
    for (const auto& [id, j] : snap.node_j) {
      out << fmt::format("{},{:.6f},{},{:.9e},{:.9e}\n", snap.frame, snap.time_s,
                         topology.qualified_label(id), j, snap.wban_j);
    }
  }
}

}  // namespace wban
