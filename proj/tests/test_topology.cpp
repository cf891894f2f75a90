#include <doctest.h>

#include "wban/errors.hpp"
#include "wban/topology.hpp"

using namespace wban;

TEST_SUITE("topology") {

TEST_CASE("reference layout has 3 regions of 2 relays and 4 sources") {
  const auto topo = build_topology(reference_topology_spec());
  CHECK(topo.num_regions() == 3);
  CHECK(topo.num_sources() == 12);
  CHECK(topo.num_relays() == 6);
  CHECK(topo.frame_len() == 4);
  for (const auto& r : topo.regions()) {
    CHECK(r.relay_ids.size() == 2);
    CHECK(r.source_ids.size() == 4);
  }
}

TEST_CASE("single source sitting on its relay is valid") {
  TopologySpec spec;
  spec.regions = {RegionSpec{{{0.5, 0.5}}, {{{0.5, 0.5}, ""}}}};
  const auto topo = build_topology(spec);
  CHECK(topo.num_sources() == 1);
  CHECK(topo.label(NodeId::source(0, 0)) == "1");
  CHECK(topo.observer(0) == NodeId::relay(0, 0));
}

TEST_CASE("source out of relay range is rejected by name") {
  TopologySpec spec;
  spec.area_width_m = 10.0;
  spec.area_height_m = 10.0;
  spec.coordinator = {1.0, 1.0};
  spec.regions = {RegionSpec{{{1.0, 1.0}}, {{{1.1, 1.0}, "A"}, {{6.0, 1.0}, "far"}}}};
  try {
    build_topology(spec);
    FAIL("expected TopologyError");
  } catch (const TopologyError& e) {
    CHECK(std::string(e.what()).find("RG1/far") != std::string::npos);
  }
}

TEST_CASE("position outside the area is rejected") {
  TopologySpec spec;
  spec.regions = {RegionSpec{{{0.5, 0.5}}, {{{1.2, 0.5}, "x"}}}};
  CHECK_THROWS_AS(build_topology(spec), TopologyError);
}

TEST_CASE("duplicate labels are rejected") {
  TopologySpec spec;
  spec.regions = {RegionSpec{{{0.5, 0.5}}, {{{0.5, 0.6}, "A"}, {{0.5, 0.4}, "A"}}}};
  CHECK_THROWS_AS(build_topology(spec), TopologyError);
}

TEST_CASE("empty regions are rejected") {
  TopologySpec spec;
  CHECK_THROWS_AS(build_topology(spec), TopologyError);
  spec.regions = {RegionSpec{{{0.5, 0.5}}, {}}};
  CHECK_THROWS_AS(build_topology(spec), TopologyError);
}

TEST_CASE("default radio parameters") {
  const auto r = default_radio_params();
  CHECK(r.tx_power_dbm == -10.0);
  CHECK(r.sensitivity_dbm == -84.7);
  CHECK(r.noise_floor_dbm == -102.0);
  CHECK(r.path_loss_exponent == 4.22);
  CHECK(r.num_subchannels == 8);
  CHECK(r.sensitivity_dbm > r.noise_floor_dbm);
  CHECK_NOTHROW(r.validate());

  auto bad = r;
  bad.sensitivity_dbm = -110.0;
  CHECK_THROWS_AS(bad.validate(), TopologyError);
  bad = r;
  bad.path_loss_exponent = 0.0;
  CHECK_THROWS_AS(bad.validate(), TopologyError);
}

TEST_CASE("every node id resolves and build is deterministic") {
  const auto a = build_topology(reference_topology_spec());
  const auto b = build_topology(reference_topology_spec());
  for (NodeId s : a.sources()) {
    CHECK(a.contains(s));
    CHECK(a.position(s) == b.position(s));
  }
  for (NodeId r : a.relays()) CHECK(a.position(r) == b.position(r));
  CHECK(a.position(NodeId::coordinator()) == a.coordinator_pos());
  CHECK_FALSE(a.contains(NodeId::source(0, 9)));
  CHECK_THROWS_AS(a.position(NodeId::source(7, 0)), LookupError);
  CHECK(a.qualified_label(NodeId::source(1, 2)) == "RG2/3");
}

}  // TEST_SUITE
