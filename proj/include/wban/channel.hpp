#pragma once

#include <set>

#include "wban/random.hpp"
#include "wban/topology.hpp"

namespace wban {

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// Deterministic part of the log-distance model:
/// PL(d0) + 10 * alpha * log10(d / d0).
double mean_path_loss_db(double distance_m, const RadioParams& radio);

/// Log-distance path loss with log-normal shadowing. The shadowing term is
/// Normal(0, sigma^2) in dB; nothing is drawn from rng when sigma is 0.
/// Throws DomainError for distance_m <= 0.
double path_loss_db(double distance_m, const RadioParams& radio, RandomStream& rng);

struct LinkBudget {
  NodeId tx;
  NodeId rx;
  double distance_m = 0.0;
  double path_loss_db = 0.0;
  double rx_power_dbm = 0.0;
  double shadowing_draw_db = 0.0;
};

/// One shadowing realisation of the tx -> rx link. Distances below the
/// reference distance are evaluated at the reference distance.
LinkBudget link_budget(NodeId tx, NodeId rx, const NetworkTopology& topology, RandomStream& rng);

double received_power_dbm(NodeId tx, NodeId rx, const NetworkTopology& topology, RandomStream& rng);

struct SinrSample {
  NodeId rx;
  double signal_dbm = 0.0;
  double interference_mw = 0.0;
  double noise_mw = 0.0;
  double sinr_db = 0.0;
};

/// SINR at rx for signal_tx while every member of concurrent_txs transmits
/// on the same resource. Interference is summed in linear milliwatts.
SinrSample sinr_at(NodeId rx, NodeId signal_tx, const std::set<NodeId>& concurrent_txs,
                   const NetworkTopology& topology, RandomStream& rng);

}  // namespace wban
