#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "wban/random.hpp"
#include "wban/topology.hpp"

namespace wban {

enum class AssignmentScheme { original, probabilistic };
std::string to_string(AssignmentScheme scheme);

struct OutageEstimate {
  AssignmentScheme scheme = AssignmentScheme::original;
  double p_out = 0.0;
  int n_trials = 0;
  /// 95% normal-approximation halfwidth. Falls back to the worst case
  /// 1.96 * sqrt(0.25 / n) when p_out is 0 or 1.
  double confidence_halfwidth = 0.0;
};

struct ReuseEstimate {
  AssignmentScheme scheme = AssignmentScheme::original;
  /// Mean number of foreign sensors left free to reuse slots.
  double avg_reuse = 0.0;
  int n_trials = 0;
  int n_sensors = 0;
  double confidence_halfwidth = 0.0;
  /// Per foreign sensor (topology order), fraction of trials it was pinned.
  std::vector<double> pin_rate;
};

double wald_halfwidth(double p_hat, int n);

/// One shadowing realisation of the linear received power (mW) at the
/// reference region's observer from every source of every other region.
std::vector<double> draw_foreign_powers_mw(const NetworkTopology& topology, int reference_region,
                                           RandomStream& rng);

/// Residual interference after probabilistic pinning: each term is
/// delta * (1 - min(1, delta / thr)).
double residual_interference_mw(const std::vector<double>& powers_mw, double thr_mw);

/// Monte Carlo P(sum > thr) (original) or P(residual > thr) (probabilistic).
/// Trial t draws from rng.fork(t), so two calls with equal seeds share every
/// channel realisation. Throws DomainError unless thr > 0 and n_trials >= 1.
OutageEstimate estimate_outage(const NetworkTopology& topology, AssignmentScheme scheme,
                               double delta_thr_linear_mw, int n_trials, const RandomStream& rng,
                               int reference_region = 0);

/// Mean count of unpinned foreign sensors. Original pins delta > thr;
/// probabilistic additionally pins delta <= thr with probability delta / thr.
ReuseEstimate estimate_reuse(const NetworkTopology& topology, AssignmentScheme scheme,
                             double delta_thr_linear_mw, int n_trials, const RandomStream& rng,
                             int reference_region = 0);

struct Lemma1Report {
  OutageEstimate outage_original;
  OutageEstimate outage_probabilistic;
  ReuseEstimate reuse_original;
  ReuseEstimate reuse_probabilistic;
  bool outage_ordering_holds = false;
  bool reuse_ordering_holds = false;
  /// Trials where the probabilistic indicator exceeded the original one.
  int pathwise_outage_violations = 0;
  int pathwise_reuse_violations = 0;
  double outage_gap = 0.0;
  double reuse_gap = 0.0;
  /// 95% halfwidth of the paired per-trial reuse difference.
  double reuse_gap_halfwidth = 0.0;
  double delta_thr_linear_mw = 0.0;
  std::uint64_t seed = 0;
};

/// Both estimators under common random numbers plus a trial-by-trial
/// dominance audit.
Lemma1Report lemma1_check(const NetworkTopology& topology, double delta_thr_linear_mw,
                          int n_trials, const RandomStream& rng, int reference_region = 0);

/// Threshold whose original-scheme outage is close to target_p_out: the
/// empirical (1 - target) quantile of the interference sum over n_pilot
/// draws from rng.
double tune_outage_threshold(const NetworkTopology& topology, double target_p_out, int n_pilot,
                             const RandomStream& rng, int reference_region = 0);

std::string format_lemma1_report(const Lemma1Report& report);
/// CSV: scheme,p_out,halfwidth,avg_reuse,n_trials,seed
void write_lemma1_csv(std::ostream& out, const Lemma1Report& report);

}  // namespace wban
