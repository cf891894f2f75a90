#include "wban/channel.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "wban/errors.hpp"

namespace wban {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double mean_path_loss_db(double distance_m, const RadioParams& radio) {
  if (!(distance_m > 0.0) || !std::isfinite(distance_m)) {
    throw DomainError(fmt::format("path loss undefined at distance {} m", distance_m));
  }
  return radio.pl_ref_db +
         10.0 * radio.path_loss_exponent * std::log10(distance_m / radio.ref_distance_m);
}

namespace {

double shadowing_db(const RadioParams& radio, RandomStream& rng) {
  if (radio.shadowing_sigma_db == 0.0) return 0.0;
  return rng.normal(0.0, radio.shadowing_sigma_db);
}

}  // namespace

double path_loss_db(double distance_m, const RadioParams& radio, RandomStream& rng) {
  const double mean = mean_path_loss_db(distance_m, radio);
  return mean + shadowing_db(radio, rng);
}

LinkBudget link_budget(NodeId tx, NodeId rx, const NetworkTopology& topology, RandomStream& rng) {
  if (tx == rx) throw DomainError("link budget needs distinct transmitter and receiver");
  const auto& radio = topology.radio();
  LinkBudget lb;
  lb.tx = tx;
  lb.rx = rx;
  lb.distance_m = distance(topology.position(tx), topology.position(rx));
  const double effective = std::max(lb.distance_m, radio.ref_distance_m);
  lb.shadowing_draw_db = shadowing_db(radio, rng);
  lb.path_loss_db = mean_path_loss_db(effective, radio) + lb.shadowing_draw_db;
  lb.rx_power_dbm = radio.tx_power_dbm - lb.path_loss_db;
  return lb;
}

double received_power_dbm(NodeId tx, NodeId rx, const NetworkTopology& topology, RandomStream& rng) {
  return link_budget(tx, rx, topology, rng).rx_power_dbm;
}

SinrSample sinr_at(NodeId rx, NodeId signal_tx, const std::set<NodeId>& concurrent_txs,
                   const NetworkTopology& topology, RandomStream& rng) {
  if (concurrent_txs.count(signal_tx)) {
    throw DomainError("signal transmitter listed among its own interferers");
  }
  SinrSample s;
  s.rx = rx;
  s.signal_dbm = received_power_dbm(signal_tx, rx, topology, rng);
  for (NodeId other : concurrent_txs) {
    if (other == rx) continue;  // a receiver does not interfere with itself
    s.interference_mw += dbm_to_mw(received_power_dbm(other, rx, topology, rng));
  }
  s.noise_mw = dbm_to_mw(topology.radio().noise_floor_dbm);
  s.sinr_db = mw_to_dbm(dbm_to_mw(s.signal_dbm) / (s.interference_mw + s.noise_mw));
  return s;
}

}  // namespace wban
