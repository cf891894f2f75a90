#include <set>
#include <tuple>

#include <doctest.h>

#include "wban/channel.hpp"
#include "wban/energy.hpp"
#include "wban/errors.hpp"
#include "wban/harness.hpp"

using namespace wban;

namespace {

NetworkTopology small_topology() {
  TopologySpec spec;
  spec.regions = {RegionSpec{{{0.5, 0.5}}, {{{0.5, 0.6}, ""}, {{0.6, 0.5}, ""}}}};
  return build_topology(spec);
}

FrameTrace empty_frame(int index) {
  FrameTrace tr;
  tr.frame_index = index;
  tr.slot_duration_s = 0.005;
  tr.frame_slots = 24;
  return tr;
}

Transmission tx_event(NodeId tx, NodeId rx, int slot, Outcome outcome) {
  Transmission t;
  t.tx = tx;
  t.rx = rx;
  t.slot = slot;
  t.outcome = outcome;
  return t;
}

}  // namespace

TEST_SUITE("energy") {

TEST_CASE("frame without events only advances time") {
  const auto topo = small_topology();
  const EnergyModel model;
  auto ledger = charge_frame(EnergyLedger(topo), empty_frame(0), model);
  CHECK(ledger.wban_total() == 0.0);
  REQUIRE(ledger.history().size() == 1);
  CHECK(ledger.history()[0].time_s == doctest::Approx(0.12));
  CHECK(ledger.next_frame() == 1);
}

TEST_CASE("one delivered transmission in closed form") {
  const auto topo = small_topology();
  EnergyModel model;
  model.tx_power_dbm = -10.0;
  auto tr = empty_frame(0);
  const NodeId src = NodeId::source(0, 0), relay = NodeId::relay(0, 0);
  tr.transmissions.push_back(tx_event(src, relay, 0, Outcome::delivered));
  const auto ledger = charge_frame(EnergyLedger(topo), tr, model);
  // (0.1 mW + 3 mW) * 5 ms and 3 mW * 5 ms
  CHECK(ledger.node_total(src) == doctest::Approx(3.1e-3 * 0.005));
  CHECK(ledger.node_total(relay) == doctest::Approx(3.0e-3 * 0.005));
  CHECK(ledger.wban_total() == doctest::Approx(6.1e-3 * 0.005));
}

TEST_CASE("a collision and its retry cost twice the transmit energy") {
  const auto topo = small_topology();
  const EnergyModel model;
  auto tr = empty_frame(0);
  const NodeId src = NodeId::source(0, 0);
  tr.transmissions.push_back(tx_event(src, NodeId::relay(0, 0), 0, Outcome::collided));
  tr.transmissions.push_back(tx_event(src, NodeId::relay(0, 0), 3, Outcome::delivered));
  const auto ledger = charge_frame(EnergyLedger(topo), tr, model);
  CHECK(ledger.node_total(src) == doctest::Approx(2.0 * model.tx_joules(0.005)));
}

TEST_CASE("coordinator is excluded from the WBAN total") {
  const auto topo = small_topology();
  const EnergyModel model;
  auto tr = empty_frame(0);
  tr.transmissions.push_back(
      tx_event(NodeId::relay(0, 0), NodeId::coordinator(), 16, Outcome::delivered));
  const auto ledger = charge_frame(EnergyLedger(topo), tr, model);
  CHECK(ledger.node_total(NodeId::coordinator()) > 0.0);
  CHECK(ledger.wban_total() == doctest::Approx(model.tx_joules(0.005)));
}

TEST_CASE("frames must arrive in order") {
  const auto topo = small_topology();
  EnergyLedger ledger(topo);
  CHECK_THROWS_AS(charge_frame_in_place(ledger, empty_frame(1), EnergyModel{}), SequenceError);
  charge_frame_in_place(ledger, empty_frame(0), EnergyModel{});
  CHECK_THROWS_AS(charge_frame_in_place(ledger, empty_frame(0), EnergyModel{}), SequenceError);
}

TEST_CASE("ledger totals match an independent recomputation from the traces") {
  Scenario sc = reference_scenario();
  sc.frames = 60;
  const auto r = compare_schemes(sc, {std::begin(kAllSchemes), std::end(kAllSchemes)});
  const EnergyModel& m = sc.energy;
  const double slot = sc.mac.slot_duration_s;
  for (const auto& s : r.schemes) {
    double expected = 0.0;
    for (const auto& tr : s.traces) {
      std::map<std::tuple<NodeId, int, int>, int> rx;
      for (const auto& t : tr.transmissions) {
        if (!t.tx.is_coordinator()) {
          expected += (std::pow(10.0, m.tx_power_dbm / 10.0) * 1e-3 + m.p_circuit_tx_w) * slot * t.packets;
        }
        auto& p = rx[{t.rx, t.slot, t.subchannel}];
        p = std::max(p, t.packets);
      }
      for (const auto& [key, p] : rx) {
        if (!std::get<0>(key).is_coordinator()) expected += m.p_circuit_rx_w * slot * p;
      }
      for (const auto& [id, n] : tr.idle_slots) expected += m.p_idle_w * slot * n;
      for (const auto& [id, n] : tr.sensing_slots) expected += m.p_sense_w * slot * n;
    }
    CHECK(s.ledger.wban_total() == doctest::Approx(expected).epsilon(1e-12));

    double node_sum = 0.0;
    for (const auto& [id, j] : s.ledger.totals()) {
      if (!id.is_coordinator()) node_sum += j;
    }
    CHECK(node_sum == doctest::Approx(s.ledger.wban_total()).epsilon(1e-12));

    double prev = 0.0;
    for (const auto& snap : s.ledger.history()) {
      CHECK(snap.wban_j >= prev);
      prev = snap.wban_j;
    }
  }
}

TEST_CASE("energy CSV layout") {
  const auto topo = small_topology();
  auto ledger = charge_frame(EnergyLedger(topo), empty_frame(0), EnergyModel{});
  std::ostringstream os;
  write_energy_csv(os, ledger, topo);
  CHECK(os.str().rfind("frame,time_s,node,cumulative_j,wban_cumulative_j\n", 0) == 0);
}

TEST_CASE("negative powers are rejected") {
  EnergyModel m;
  m.p_idle_w = -1.0;
  CHECK_THROWS_AS(m.validate(), ConfigError);
}

}  // TEST_SUITE
