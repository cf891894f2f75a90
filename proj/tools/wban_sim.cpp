// wban_sim: command-line front end for the WBAN simulator.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "wban/errors.hpp"
#include "wban/harness.hpp"

namespace {

struct CommonFlags {
  std::string scenario;
  std::uint64_t seed = 0;
  int frames = 0;
  int trials = 0;
  std::string out = "out";
  std::vector<std::string> sets;
  std::vector<std::string> schemes;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--scenario", f.scenario, "scenario JSON file (default: built-in reference)");
  sub->add_option("--seed", f.seed, "base RNG seed");
  sub->add_option("--frames", f.frames, "number of simulated frames")->check(CLI::NonNegativeNumber);
  sub->add_option("--trials", f.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--set", f.sets, "override key=value (repeatable)")->take_all();
}

wban::RunConfig to_config(const CLI::App* sub, const CommonFlags& f) {
  wban::RunConfig c;
  c.scenario_path = f.scenario;
  c.out_dir = f.out;
  c.overrides = f.sets;
  if (sub->count("--seed")) c.seed = f.seed;
  if (sub->count("--frames")) c.n_frames = f.frames;
  if (sub->count("--trials")) c.n_trials = f.trials;
  if (!f.schemes.empty()) {
    c.schemes.clear();
    for (const auto& s : f.schemes) c.schemes.push_back(wban::parse_scheme(s));
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WBAN inter-region interference simulator"};
  app.require_subcommand(1);

  CommonFlags compare_f, lemma_f, golden_f, schedule_f;
  auto* compare = app.add_subcommand("compare", "run DCAIM, OR and single-hop on one scenario");
  add_common(compare, compare_f);
  compare->add_option("--scheme", compare_f.schemes, "restrict to these schemes (repeatable)");

  auto* lemma = app.add_subcommand("lemma1", "Monte Carlo outage / reuse comparison");
  add_common(lemma, lemma_f);

  auto* golden = app.add_subcommand("golden", "check the three-region worked example");
  add_common(golden, golden_f);

  auto* schedule = app.add_subcommand("schedule", "measurement round and DCAIM schedule");
  add_common(schedule, schedule_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (compare->parsed()) {
      const auto cfg = to_config(compare, compare_f);
      const auto r = wban::run_compare(cfg);
      for (const auto& s : r.schemes) {
        std::cout << fmt::format("{:<20} energy {:.6e} J  delivered {}/{}\n",
                                 wban::to_string(s.scheme), s.ledger.wban_total(), s.delivered,
                                 s.generated);
      }
      if (!r.sinr_delta_db.empty()) {
        std::cout << fmt::format("mean SINR gain DCAIM over OR: {:.3f} dB\n",
                                 r.mean_sinr_delta_db());
      }
      std::cout << "outputs in " << cfg.out_dir.string() << "\n";
    } else if (lemma->parsed()) {
      const auto cfg = to_config(lemma, lemma_f);
      std::cout << wban::format_lemma1_report(wban::run_lemma1(cfg));
    } else if (golden->parsed()) {
      const auto cfg = to_config(golden, golden_f);
      const auto rep = wban::run_golden(cfg);
      std::cout << rep.format();
      return rep.passed() ? 0 : 1;
    } else if (schedule->parsed()) {
      const auto cfg = to_config(schedule, schedule_f);
      const auto plan = wban::run_schedule(cfg);
      std::cout << wban::format_plan(plan, wban::build_topology(wban::resolve_run(cfg).topology));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
