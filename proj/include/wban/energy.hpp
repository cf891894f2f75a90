#pragma once

#include <map>
#include <ostream>
#include <vector>

#include "wban/mac_sim.hpp"
#include "wban/topology.hpp"

namespace wban {

/// Linear radio model: circuit power plus radiated power over the airtime.
struct EnergyModel {
  double tx_power_dbm = -10.0;
  double p_circuit_tx_w = 3e-3;
  double p_circuit_rx_w = 3e-3;
  double p_idle_w = 1e-4;
  /// Carrier sensing while backing off with a packet pending.
  double p_sense_w = 3e-3;

  void validate() const;
  /// Joules to transmit `packets` packets of one slot each.
  double tx_joules(double slot_s, int packets = 1) const;
  double rx_joules(double slot_s, int packets = 1) const;
};

/// Cumulative per-node energy with a per-frame history. The coordinator is
/// tracked but excluded from the WBAN total.
class EnergyLedger {
 public:
  struct Snapshot {
    int frame = 0;
    double time_s = 0.0;
    std::map<NodeId, double> node_j;
    double wban_j = 0.0;
  };

  EnergyLedger() = default;
  explicit EnergyLedger(const NetworkTopology& topology);

  int next_frame() const { return next_frame_; }
  double node_total(NodeId id) const;
  double wban_total() const;
  const std::map<NodeId, double>& totals() const { return totals_; }
  const std::vector<Snapshot>& history() const { return history_; }

  /// Adds joules to one node (used by charge_frame).
  void add(NodeId id, double joules);
  void close_frame(int frame, double time_s);

 private:
  std::map<NodeId, double> totals_;
  std::vector<Snapshot> history_;
  int next_frame_ = 0;
};

/// Charges every energy event of one frame: each transmission (retries
/// included) to its sender, one reception per (receiver, slot, sub-channel),
/// idle listening of owned-but-unused grants, and carrier sensing during
/// backoff. Throws SequenceError unless trace.frame_index == next_frame().
EnergyLedger charge_frame(EnergyLedger ledger, const FrameTrace& trace, const EnergyModel& model);
void charge_frame_in_place(EnergyLedger& ledger, const FrameTrace& trace, const EnergyModel& model);

/// CSV: frame,time_s,node,cumulative_j,wban_cumulative_j
void write_energy_csv(std::ostream& out, const EnergyLedger& ledger, const NetworkTopology& topology);

}  // namespace wban
