#include <cmath>
#include <limits>

#include <doctest.h>

#include "wban/channel.hpp"
#include "wban/dcaim.hpp"
#include "wban/errors.hpp"
#include "wban/harness.hpp"

using namespace wban;

namespace {

std::set<NodeId> all_members(const std::map<int, InterferenceSet>& sets) {
  std::set<NodeId> out;
  for (const auto& [r, is] : sets) out.insert(is.members.begin(), is.members.end());
  return out;
}

// Random layout: regions stacked along y, sources scattered around one relay.
NetworkTopology random_topology(RandomStream& rng, int regions, int max_sources) {
  TopologySpec spec;
  spec.area_width_m = 1.0;
  spec.area_height_m = 2.0;
  spec.coordinator = {0.5, 1.0};
  const double band = 2.0 / regions;
  for (int r = 0; r < regions; ++r) {
    RegionSpec rs;
    const Point c{0.5, band * (r + 0.5)};
    rs.relays = {c};
    const int n = rng.uniform_int(2, max_sources + 1);
    for (int k = 0; k < n; ++k) {
      const double dx = (rng.uniform() - 0.5) * 0.6;
      const double dy = (rng.uniform() - 0.5) * std::min(0.6, band * 0.9);
      rs.sources.push_back({{c.x + dx, c.y + dy}, ""});
    }
    spec.regions.push_back(rs);
  }
  return build_topology(spec);
}

}  // namespace

TEST_SUITE("dcaim") {

TEST_CASE("measurement round on the reference layout") {
  const auto topo = build_topology(reference_topology_spec());
  RandomStream rng(5);
  const auto m = measurement_round(topo, rng);
  CHECK(m.size() == 36);
  for (int i = 0; i < 3; ++i) CHECK(std::isfinite(m.min_own_dbm(i)));
}

TEST_CASE("single region matrix holds only own entries") {
  TopologySpec spec;
  spec.regions = {RegionSpec{{{0.5, 0.5}}, {{{0.5, 0.6}, ""}, {{0.6, 0.5}, ""}}}};
  const auto topo = build_topology(spec);
  RandomStream rng(5);
  const auto m = measurement_round(topo, rng);
  CHECK(m.size() == 2);
  CHECK(m.min_own_dbm(0) == std::min(m.at(0, NodeId::source(0, 0)), m.at(0, NodeId::source(0, 1))));
  CHECK(build_interference_list(m, 0, topo.radio()).members.empty());
}

TEST_CASE("matrix with sigma 0 equals the closed-form received power") {
  auto spec = reference_topology_spec();
  spec.radio.shadowing_sigma_db = 0.0;
  const auto topo = build_topology(spec);
  RandomStream rng(5);
  const auto m = measurement_round(topo, rng);
  const auto& r = topo.radio();
  for (int i = 0; i < topo.num_regions(); ++i) {
    for (NodeId s : topo.sources()) {
      const double d = std::max(distance(topo.position(s), topo.position(topo.observer(i))),
                                r.ref_distance_m);
      const double oracle =
          r.tx_power_dbm - (r.pl_ref_db + 10.0 * r.path_loss_exponent * std::log10(d / r.ref_distance_m));
      CHECK(m.at(i, s) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("missing matrix entries are reported") {
  PowerMatrix m({2, 2});
  m.set(0, NodeId::source(0, 0), -60.0);
  CHECK_THROWS_AS(m.min_own_dbm(0), IncompleteMatrixError);
  m.set(0, NodeId::source(0, 1), -61.0);
  CHECK_THROWS_AS(build_interference_list(m, 0, default_radio_params()), IncompleteMatrixError);
}

TEST_CASE("golden matrix yields the worked-example lists and sets") {
  const auto topo = golden_topology();
  const auto plan = plan_dcaim(topo, golden_power_matrix());
  auto n = [&](int r, const char* l) { return golden_node(topo, r, l); };
  CHECK(plan.lists[0].members == std::set<NodeId>{n(2, "D"), n(3, "d")});
  CHECK(plan.lists[1].members == std::set<NodeId>{n(1, "2"), n(1, "4"), n(3, "d")});
  CHECK(plan.lists[2].members == std::set<NodeId>{n(2, "C")});
  CHECK(plan.sets.at(0).members == std::set<NodeId>{n(2, "D"), n(3, "d"), n(1, "2"), n(1, "4")});
  CHECK(plan.sets.at(1).members ==
        std::set<NodeId>{n(1, "2"), n(1, "4"), n(3, "d"), n(2, "C"), n(2, "D")});
  CHECK(plan.sets.at(2).members == std::set<NodeId>{n(2, "C"), n(3, "d")});
  CHECK(format_members(plan.lists[0].members, topo) == "{(2,D), (3,d)}");
}

TEST_CASE("golden schedule gives node 1 of RG1 four slots") {
  const auto topo = golden_topology();
  const auto plan = plan_dcaim(topo, golden_power_matrix());
  CHECK(plan.schedules.at(0).slot_count(golden_node(topo, 1, "1")) == 4);
}

TEST_CASE("threshold extremes") {
  const auto topo = build_topology(reference_topology_spec());
  RandomStream rng(8);
  auto m = measurement_round(topo, rng);
  auto radio = topo.radio();
  radio.delta_thr_db = 1e9;
  for (int i = 0; i < 3; ++i) CHECK(build_interference_list(m, i, radio).members.size() == 8);

  // Foreign powers strictly below the weakest own link, zero margin.
  PowerMatrix low({2, 2});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) low.set(i, NodeId::source(j, k), i == j ? -60.0 : -80.0);
    }
  }
  radio.delta_thr_db = 0.0;
  CHECK(build_interference_list(low, 0, radio).members.empty());
  CHECK(build_interference_list(low, 1, radio).members.empty());
}

TEST_CASE("interference list membership is exactly the threshold predicate") {
  RandomStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int regions = rng.uniform_int(2, 6);
    std::vector<int> counts;
    for (int r = 0; r < regions; ++r) counts.push_back(rng.uniform_int(1, 7));
    PowerMatrix m(counts);
    for (int i = 0; i < regions; ++i) {
      for (int j = 0; j < regions; ++j) {
        for (int k = 0; k < counts[static_cast<std::size_t>(j)]; ++k) {
          m.set(i, NodeId::source(j, k), -100.0 + 60.0 * rng.uniform());
        }
      }
    }
    RadioParams radio;
    radio.delta_thr_db = 20.0 * rng.uniform();
    for (int i = 0; i < regions; ++i) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int k = 0; k < counts[static_cast<std::size_t>(i)]; ++k) {
        dmin = std::min(dmin, *m.get(i, NodeId::source(i, k)));
      }
      const auto il = build_interference_list(m, i, radio);
      for (int j = 0; j < regions; ++j) {
        for (int k = 0; k < counts[static_cast<std::size_t>(j)]; ++k) {
          const NodeId s = NodeId::source(j, k);
          const bool expected = j != i && *m.get(i, s) > dmin - radio.delta_thr_db;
          CHECK(il.members.count(s) == static_cast<std::size_t>(expected));
        }
      }
    }
  }
}

TEST_CASE("interference set union formula") {
  SUBCASE("empty lists give empty sets") {
    const auto sets = merge_interference_sets({{0, {}}, {1, {}}, {2, {}}});
    for (const auto& [r, is] : sets) CHECK(is.members.empty());
  }
  SUBCASE("two regions") {
    const NodeId a = NodeId::source(1, 0);
    const auto sets = merge_interference_sets({{0, {a}}, {1, {}}});
    CHECK(sets.at(0).members == std::set<NodeId>{a});
    CHECK(sets.at(1).members == std::set<NodeId>{a});
  }
  SUBCASE("duplicate owners") {
    CHECK_THROWS_AS(merge_interference_sets({{0, {}}, {0, {}}}), InputError);
  }
  SUBCASE("listed sources appear in both sets") {
    RandomStream rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<InterferenceList> lists;
      for (int i = 0; i < 4; ++i) {
        InterferenceList il{i, {}};
        for (int j = 0; j < 4; ++j) {
          for (int k = 0; k < 3; ++k) {
            if (j != i && rng.uniform() < 0.3) il.members.insert(NodeId::source(j, k));
          }
        }
        lists.push_back(il);
      }
      const auto sets = merge_interference_sets(lists);
      for (const auto& il : lists) {
        for (NodeId m : il.members) {
          CHECK(sets.at(il.owner).members.count(m) == 1);
          CHECK(sets.at(m.region).members.count(m) == 1);
        }
      }
    }
  }
}

TEST_CASE("scheduling edge cases") {
  SUBCASE("no pins, one node, four slots") {
    TopologySpec spec;
    spec.regions = {RegionSpec{{{0.5, 0.5}}, {{{0.5, 0.6}, ""}}},
                    RegionSpec{{{0.5, 1.5}}, {{{0.5, 1.6}, ""}, {{0.5, 1.4}, ""}, {{0.6, 1.5}, ""},
                                              {{0.4, 1.5}, ""}}}};
    const auto topo = build_topology(spec);
    const auto s = schedule_with_pins({}, topo);
    CHECK(s.at(0).slot_count(NodeId::source(0, 0)) == 4);
  }
  SUBCASE("everyone pinned keeps original slots") {
    const auto topo = build_topology(reference_topology_spec());
    std::set<NodeId> all;
    for (NodeId s : topo.sources()) all.insert(s);
    const auto pinned = schedule_with_pins(all, topo);
    const auto base = original_tdma(topo);
    int total = 0, base_total = 0;
    for (const auto& [r, sched] : pinned) {
      CHECK(sched.assignment() == base.at(r).assignment());
      total += sched.total_transmissions();
      base_total += base.at(r).total_transmissions();
    }
    CHECK(total == base_total);
  }
  SUBCASE("too many pins in one slot") {
    auto spec = reference_topology_spec();
    spec.radio.num_subchannels = 2;
    const auto topo = build_topology(spec);
    const std::set<NodeId> pins{NodeId::source(0, 0), NodeId::source(1, 0), NodeId::source(2, 0)};
    CHECK_THROWS_AS(schedule_with_pins(pins, topo), InfeasibleScheduleError);
  }
  SUBCASE("missing region set") {
    const auto topo = build_topology(reference_topology_spec());
    CHECK_THROWS_AS(assign_channels({{0, {0, {}}}}, topo), InputError);
  }
}

TEST_CASE("randomized schedule safety, coverage and reuse") {
  RandomStream rng(2025);
  for (int trial = 0; trial < 300; ++trial) {
    const auto topo = random_topology(rng, rng.uniform_int(3, 6), 6);
    const auto plan = plan_dcaim(topo, rng);
    const auto pinned = all_members(plan.sets);
    int total = 0;
    std::map<std::pair<int, int>, std::set<NodeId>> cells;
    for (const auto& [r, sched] : plan.schedules) {
      for (NodeId s : topo.region(r).source_ids) CHECK(sched.slot_count(s) >= 1);
      for (const auto& g : sched.grants) cells[{g.slot, g.subchannel}].insert(g.node);
      total += sched.total_transmissions();
      for (NodeId s : sched.orthogonal_nodes) {
        const auto g = sched.grants_for(s);
        REQUIRE(g.size() == 1);
        CHECK(g[0].slot == s.node);
      }
    }
    for (const auto& [cell, nodes] : cells) {
      int members = 0;
      for (NodeId n : nodes) members += static_cast<int>(pinned.count(n));
      CHECK((members == 0 || nodes.size() == 1));
    }
    const int baseline = topo.num_sources();
    if (static_cast<int>(pinned.size()) == topo.num_sources()) {
      CHECK(total == baseline);
    } else {
      CHECK(total > baseline);
    }
  }
}

TEST_CASE("probabilistic pinning") {
  PowerMatrix m({1, 1});
  m.set(0, NodeId::source(0, 0), -60.0);
  m.set(1, NodeId::source(1, 0), -60.0);
  m.set(0, NodeId::source(1, 0), -65.0);
  m.set(1, NodeId::source(0, 0), -100.0);
  TopologySpec spec;
  spec.regions = {RegionSpec{{{0.5, 0.5}}, {{{0.5, 0.6}, ""}}},
                  RegionSpec{{{0.5, 1.5}}, {{{0.5, 1.6}, ""}}}};
  const auto topo = build_topology(spec);
  const NodeId cand = NodeId::source(1, 0);
  const double delta = dbm_to_mw(-65.0);

  SUBCASE("ratio one always pins") {
    RandomStream rng(1);
    for (int i = 0; i < 100; ++i) CHECK(assign_channels_probabilistic(m, topo, delta, rng).pinned.count(cand) == 1);
  }
  SUBCASE("vanishing ratio never pins") {
    RandomStream rng(1);
    for (int i = 0; i < 100; ++i) CHECK(assign_channels_probabilistic(m, topo, delta * 1e12, rng).pinned.empty());
  }
  SUBCASE("ratio 0.3 pins thirty percent of the time") {
    RandomStream rng(1);
    int hits = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const auto pa = assign_channels_probabilistic(m, topo, delta / 0.3, rng);
      CHECK(pa.candidates == std::set<NodeId>{cand});
      hits += static_cast<int>(pa.pinned.count(cand));
    }
    CHECK(std::abs(hits / static_cast<double>(n) - 0.3) <= 0.015);
  }
  SUBCASE("tiny threshold matches the deterministic orthogonal set") {
    const auto ref = build_topology(reference_topology_spec());
    RandomStream rng(3);
    const auto matrix = measurement_round(ref, rng);
    const auto plan = plan_dcaim(ref, matrix);
    std::set<NodeId> listed;
    for (const auto& il : plan.lists) listed.insert(il.members.begin(), il.members.end());
    const auto pa = assign_channels_probabilistic(matrix, ref, 1e-300, rng);
    CHECK(pa.pinned == listed);
  }
  SUBCASE("threshold must be positive") {
    RandomStream rng(1);
    CHECK_THROWS_AS(assign_channels_probabilistic(m, topo, 0.0, rng), DomainError);
  }
}

TEST_CASE("schedule rendering") {
  const auto topo = golden_topology();
  const auto plan = plan_dcaim(topo, golden_power_matrix());
  const auto grid = format_schedule_grid(plan.schedules, topo);
  CHECK(grid.find("RG1") != std::string::npos);
  std::ostringstream csv;
  write_schedule_csv(csv, plan.schedules, topo);
  CHECK(csv.str().rfind("region,slot,subchannel,node,pinned\n", 0) == 0);
}

}  // TEST_SUITE
