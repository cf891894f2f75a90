#include "wban/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "wban/channel.hpp"
#include "wban/errors.hpp"

namespace wban {

std::string to_string(AssignmentScheme scheme) {
  return scheme == AssignmentScheme::original ? "original" : "probabilistic";
}

double wald_halfwidth(double p_hat, int n) {
  if (n < 1) return 0.0;
  const double var = (p_hat <= 0.0 || p_hat >= 1.0) ? 0.25 : p_hat * (1.0 - p_hat);
  return 1.96 * std::sqrt(var / n);
}

namespace {

void check_args(const NetworkTopology& topology, double thr, int n_trials, int ref) {
  if (!(thr > 0.0) || std::isnan(thr)) {
    throw DomainError(fmt::format("outage threshold must be > 0 mW, got {}", thr));
  }
  if (n_trials < 1) throw DomainError("n_trials must be >= 1");
  if (ref < 0 || ref >= topology.num_regions()) {
    throw DomainError(fmt::format("reference region {} out of range", ref));
  }
}

double pin_ratio(double delta, double thr) { return std::min(1.0, delta / thr); }

/// Per-trial outcome of both schemes on one shared realisation.
struct TrialOutcome {
  bool outage_original = false;
  bool outage_probabilistic = false;
  int reuse_original = 0;
  int reuse_probabilistic = 0;
  std::vector<bool> pinned_original;
  std::vector<bool> pinned_probabilistic;
};

TrialOutcome run_trial(const NetworkTopology& topology, double thr, int ref, RandomStream rng) {
  const auto powers = draw_foreign_powers_mw(topology, ref, rng);
  TrialOutcome out;
  double raw = 0.0;
  for (double d : powers) raw += d;
  out.outage_original = raw > thr;
  out.outage_probabilistic = residual_interference_mw(powers, thr) > thr;

  out.pinned_original.resize(powers.size());
  out.pinned_probabilistic.resize(powers.size());
  for (std::size_t i = 0; i < powers.size(); ++i) {
    const double d = powers[i];
    const double u = rng.uniform();  // drawn for every sensor to keep streams aligned
    out.pinned_original[i] = d > thr;
    out.pinned_probabilistic[i] = d > thr || u < d / thr;
    out.reuse_original += out.pinned_original[i] ? 0 : 1;
    out.reuse_probabilistic += out.pinned_probabilistic[i] ? 0 : 1;
  }
  return out;
}

struct MeanVar {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double halfwidth() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
    return 1.96 * std::sqrt(var / n);
  }
};

}  // namespace

std::vector<double> draw_foreign_powers_mw(const NetworkTopology& topology, int reference_region,
                                           RandomStream& rng) {
  const NodeId observer = topology.observer(reference_region);
  std::vector<double> out;
  for (NodeId src : topology.sources()) {
    if (src.region == reference_region) continue;
    out.push_back(dbm_to_mw(received_power_dbm(src, observer, topology, rng)));
  }
  return out;
}

double residual_interference_mw(const std::vector<double>& powers_mw, double thr_mw) {
  double sum = 0.0;
  for (double d : powers_mw) sum += d * (1.0 - pin_ratio(d, thr_mw));
  return sum;
}

OutageEstimate estimate_outage(const NetworkTopology& topology, AssignmentScheme scheme,
                               double delta_thr_linear_mw, int n_trials, const RandomStream& rng,
                               int reference_region) {
  check_args(topology, delta_thr_linear_mw, n_trials, reference_region);
  long hits = 0;
  for (int t = 0; t < n_trials; ++t) {
    auto trial_rng = rng.fork(static_cast<std::uint64_t>(t));
    const auto powers = draw_foreign_powers_mw(topology, reference_region, trial_rng);
    double level = 0.0;
    if (scheme == AssignmentScheme::original) {
      for (double d : powers) level += d;
    } else {
      level = residual_interference_mw(powers, delta_thr_linear_mw);
    }
    if (level > delta_thr_linear_mw) ++hits;
  }
  OutageEstimate e;
  e.scheme = scheme;
  e.n_trials = n_trials;
  e.p_out = static_cast<double>(hits) / n_trials;
  e.confidence_halfwidth = wald_halfwidth(e.p_out, n_trials);
  return e;
}

ReuseEstimate estimate_reuse(const NetworkTopology& topology, AssignmentScheme scheme,
                             double delta_thr_linear_mw, int n_trials, const RandomStream& rng,
                             int reference_region) {
  check_args(topology, delta_thr_linear_mw, n_trials, reference_region);
  ReuseEstimate e;
  e.scheme = scheme;
  e.n_trials = n_trials;
  MeanVar reuse;
  std::vector<long> pins;
  for (int t = 0; t < n_trials; ++t) {
    const auto trial = run_trial(topology, delta_thr_linear_mw, reference_region,
                                 rng.fork(static_cast<std::uint64_t>(t)));
    const auto& pinned = scheme == AssignmentScheme::original ? trial.pinned_original
                                                              : trial.pinned_probabilistic;
    if (pins.empty()) pins.assign(pinned.size(), 0);
    for (std::size_t i = 0; i < pinned.size(); ++i) pins[i] += pinned[i] ? 1 : 0;
    reuse.add(scheme == AssignmentScheme::original ? trial.reuse_original
                                                   : trial.reuse_probabilistic);
  }
  e.n_sensors = static_cast<int>(pins.size());
  e.avg_reuse = reuse.mean();
  e.confidence_halfwidth = reuse.halfwidth();
  for (long p : pins) e.pin_rate.push_back(static_cast<double>(p) / n_trials);
  return e;
}

Lemma1Report lemma1_check(const NetworkTopology& topology, double delta_thr_linear_mw,
                          int n_trials, const RandomStream& rng, int reference_region) {
  check_args(topology, delta_thr_linear_mw, n_trials, reference_region);
  Lemma1Report rep;
  rep.delta_thr_linear_mw = delta_thr_linear_mw;
  rep.seed = rng.seed();
  rep.outage_original =
      estimate_outage(topology, AssignmentScheme::original, delta_thr_linear_mw, n_trials, rng,
                      reference_region);
  rep.outage_probabilistic =
      estimate_outage(topology, AssignmentScheme::probabilistic, delta_thr_linear_mw, n_trials,
                      rng, reference_region);
  rep.reuse_original = estimate_reuse(topology, AssignmentScheme::original, delta_thr_linear_mw,
                                      n_trials, rng, reference_region);
  rep.reuse_probabilistic = estimate_reuse(topology, AssignmentScheme::probabilistic,
                                           delta_thr_linear_mw, n_trials, rng, reference_region);

  MeanVar diff;
  for (int t = 0; t < n_trials; ++t) {
    const auto trial = run_trial(topology, delta_thr_linear_mw, reference_region,
                                 rng.fork(static_cast<std::uint64_t>(t)));
    if (trial.outage_probabilistic && !trial.outage_original) ++rep.pathwise_outage_violations;
    if (trial.reuse_probabilistic > trial.reuse_original) ++rep.pathwise_reuse_violations;
    diff.add(trial.reuse_original - trial.reuse_probabilistic);
  }
  rep.outage_gap = rep.outage_original.p_out - rep.outage_probabilistic.p_out;
  rep.reuse_gap = rep.reuse_original.avg_reuse - rep.reuse_probabilistic.avg_reuse;
  rep.reuse_gap_halfwidth = diff.halfwidth();
  rep.outage_ordering_holds = rep.outage_probabilistic.p_out <= rep.outage_original.p_out;
  rep.reuse_ordering_holds = rep.reuse_probabilistic.avg_reuse <= rep.reuse_original.avg_reuse;
  return rep;
}

double tune_outage_threshold(const NetworkTopology& topology, double target_p_out, int n_pilot,
                             const RandomStream& rng, int reference_region) {
  if (!(target_p_out > 0.0 && target_p_out < 1.0)) {
    throw DomainError("target outage must lie in (0, 1)");
  }
  if (n_pilot < 1) throw DomainError("n_pilot must be >= 1");
  std::vector<double> sums;
  sums.reserve(static_cast<std::size_t>(n_pilot));
  for (int t = 0; t < n_pilot; ++t) {
    auto trial_rng = rng.fork(static_cast<std::uint64_t>(t));
    double s = 0.0;
    for (double d : draw_foreign_powers_mw(topology, reference_region, trial_rng)) s += d;
    sums.push_back(s);
  }
  std::sort(sums.begin(), sums.end());
  const auto idx = static_cast<std::size_t>(
      std::clamp((1.0 - target_p_out) * n_pilot, 0.0, static_cast<double>(n_pilot - 1)));
  const double thr = sums[idx];
  if (!(thr > 0.0)) throw DomainError("no interference power to tune a threshold against");
  return thr;
}

std::string format_lemma1_report(const Lemma1Report& r) {
  std::string s;
  s += fmt::format("threshold_mw           {:.6e}\n", r.delta_thr_linear_mw);
  s += fmt::format("seed                   {}\n", r.seed);
  s += fmt::format("trials                 {}\n", r.outage_original.n_trials);
  s += fmt::format("p_out original         {:.6f} +/- {:.6f}\n", r.outage_original.p_out,
                   r.outage_original.confidence_halfwidth);
  s += fmt::format("p_out probabilistic    {:.6f} +/- {:.6f}\n", r.outage_probabilistic.p_out,
                   r.outage_probabilistic.confidence_halfwidth);
  s += fmt::format("reuse original         {:.6f} +/- {:.6f} (of {} sensors)\n",
                   r.reuse_original.avg_reuse, r.reuse_original.confidence_halfwidth,
                   r.reuse_original.n_sensors);
  s += fmt::format("reuse probabilistic    {:.6f} +/- {:.6f}\n", r.reuse_probabilistic.avg_reuse,
                   r.reuse_probabilistic.confidence_halfwidth);
  s += fmt::format("outage gap             {:.6f}\n", r.outage_gap);
  s += fmt::format("reuse gap              {:.6f} +/- {:.6f}\n", r.reuse_gap, r.reuse_gap_halfwidth);
  s += fmt::format("pathwise violations    outage {} reuse {}\n", r.pathwise_outage_violations,
                   r.pathwise_reuse_violations);
  s += fmt::format("outage_ordering_holds  {}\n", r.outage_ordering_holds);
  s += fmt::format("reuse_ordering_holds   {}\n", r.reuse_ordering_holds);
  return s;
}

void write_lemma1_csv(std::ostream& out, const Lemma1Report& r) {
  out << "scheme,p_out,halfwidth,avg_reuse,n_trials,seed\n";
  auto row = [&](const OutageEstimate& o, const ReuseEstimate& u) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{},{}\n", to_string(o.scheme), o.p_out,
                       o.confidence_halfwidth, u.avg_reuse, o.n_trials, r.seed);
  };
  row(r.outage_original, r.reuse_original);
  row(r.outage_probabilistic, r.reuse_probabilistic);
}

}  // namespace wban
