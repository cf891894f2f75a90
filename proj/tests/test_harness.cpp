#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "wban/errors.hpp"
#include "wban/harness.hpp"

using namespace wban;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("wban_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("golden report passes and flags the IS1 erratum") {
  const auto rep = run_golden_checks();
  CHECK(rep.passed());
  REQUIRE(rep.notes.size() == 1);
  CHECK(rep.notes[0].find("(1,4)") != std::string::npos);
  CHECK(rep.format().find("golden: PASS") != std::string::npos);
}

TEST_CASE("compare writes its artifacts and effective config") {
  RunConfig cfg;
  cfg.n_frames = 20;
  cfg.out_dir = scratch("compare");
  cfg.overrides = {"radio.shadowing_sigma_db=4"};
  run_compare(cfg);
  for (const char* f : {"energy.csv", "sinr.csv", "schedule.txt", "summary.txt",
                        "effective_config.json"}) {
    CHECK(fs::exists(cfg.out_dir / f));
  }
  const auto eff = nlohmann::json::parse(slurp(cfg.out_dir / "effective_config.json"));
  CHECK(eff["radio"]["shadowing_sigma_db"] == 4.0);
  CHECK(eff["run"]["frames"] == 20);
  CHECK(slurp(cfg.out_dir / "energy.csv").rfind("scheme,frame,time_s,node,cumulative_j", 0) == 0);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("compare is byte-identical on rerun") {
  RunConfig cfg;
  cfg.n_frames = 30;
  cfg.out_dir = scratch("det_a");
  run_compare(cfg);
  RunConfig again = cfg;
  again.out_dir = scratch("det_b");
  run_compare(again);
  for (const char* f : {"energy.csv", "sinr.csv", "summary.txt", "schedule.txt"}) {
    CHECK(slurp(cfg.out_dir / f) == slurp(again.out_dir / f));
  }
  fs::remove_all(cfg.out_dir);
  fs::remove_all(again.out_dir);
}

TEST_CASE("lemma1 with a single trial is legal") {
  RunConfig cfg;
  cfg.n_trials = 1;
  cfg.out_dir = scratch("lemma1");
  const auto rep = run_lemma1(cfg);
  CHECK(rep.outage_original.n_trials == 1);
  CHECK(rep.outage_original.confidence_halfwidth == doctest::Approx(0.98));
  CHECK(fs::exists(cfg.out_dir / "lemma1.csv"));
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("lemma1 without interferers has zero outage") {
  const auto path = fs::temp_directory_path() / "wban_lonely.json";
  {
    Scenario s = reference_scenario();
    s.topology.regions.resize(1);
    s.analysis.thr_outage_mw = 1e-9;
    std::ofstream(path) << scenario_to_json(s).dump();
  }
  RunConfig cfg;
  cfg.scenario_path = path;
  cfg.n_trials = 100;
  cfg.out_dir = scratch("lonely");
  const auto rep = run_lemma1(cfg);
  CHECK(rep.outage_original.p_out == 0.0);
  CHECK(rep.outage_probabilistic.p_out == 0.0);
  fs::remove_all(cfg.out_dir);
  fs::remove(path);
}

TEST_CASE("bad inputs surface as errors") {
  RunConfig cfg;
  cfg.out_dir = scratch("bad");
  cfg.scenario_path = "/nonexistent/scenario.json";
  CHECK_THROWS_AS(run_compare(cfg), ConfigError);
  cfg.scenario_path.clear();
  cfg.overrides = {"mac.bogus=1"};
  CHECK_THROWS_AS(run_schedule(cfg), ConfigError);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("schedule writes grid and csv") {
  RunConfig cfg;
  cfg.out_dir = scratch("schedule");
  const auto plan = run_schedule(cfg);
  CHECK(plan.schedules.size() == 3);
  CHECK(slurp(cfg.out_dir / "schedule.csv").rfind("region,slot,subchannel,node,pinned", 0) == 0);
  fs::remove_all(cfg.out_dir);
}

}  // TEST_SUITE
