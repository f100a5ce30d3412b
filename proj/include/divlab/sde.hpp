#pragma once

// Euler-Maruyama simulation of the diffusion attached to the operator:
//
//   dX = (beta(X) + Bbar(X)) dt + sigma(X) dW,   sigma sigma^T = A,
//
// where beta is the divergence-form drift computed by beta_drift().  An
// optional taming factor 1/(1 + sqrt(dt) |b|) bounds the per-step drift
// displacement, which keeps the scheme stable for fields whose drift blows
// up on a small singular set.  Every path owns its own RNG stream seeded
// from (master seed, path index), so ensembles are reproducible and bitwise
// independent of the OpenMP thread count.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "divlab/field.hpp"

namespace divlab {

struct SdeOptions {
  double dt = 1e-3;
  double T = 10.0;
  std::array<double, 3> x0{0.0, 0.0, 0.0};
  int paths = 100;
  std::uint64_t seed = 1;
  bool taming = false;
  std::vector<double> ladder;      // radii whose first-crossing times are recorded
  bool stop_after_ladder = false;  // end a path once the top radius is crossed
  double abort_radius = 1e8;
};

struct PathRecord {
  std::array<double, 3> final_x{0.0, 0.0, 0.0};
  double final_time = 0.0;
  bool aborted = false;
  std::int64_t drift_flagged_steps = 0;
  std::vector<double> crossing_times;  // per ladder radius; NaN when never crossed
};

struct EnsembleSummary {
  int paths = 0;
  int aborted = 0;
  double mean_final_radius = 0.0;
  std::vector<double> ladder;
  std::vector<double> crossing_fraction;  // per ladder radius
  std::vector<double> median_crossing;    // per ladder radius, NaN if none crossed
  std::string explosion_verdict;  // explosive-signature | no-explosion-signature |
                                  // inconclusive | "" (no ladder)
  std::vector<PathRecord> records;
};

EnsembleSummary simulate_ensemble(const CoefficientField& f, const SdeOptions& opts);

struct ExitLawResult {
  double mean_exit_time = 0.0;
  double std_error = 0.0;
  double mean_exit_radius = 0.0;
  int censored = 0;  // paths that never left the ball before T
};

// First-exit statistics from the centered ball of the given radius.
ExitLawResult exit_law(const CoefficientField& f, double radius, const SdeOptions& opts);

struct OccupationSpec {
  std::array<double, 2> win_lo{-2.0, -2.0};
  std::array<double, 2> win_hi{2.0, 2.0};
  int bins_x = 16;
  int bins_y = 16;
  double burn_in = 2.0;
  int thin = 10;          // record every thin-th step
  int ref_subsample = 4;  // midpoint subsamples per bin edge for the reference
};

struct OccupationResult {
  std::vector<double> histogram;  // bins_x * bins_y, normalized over the window
  std::vector<double> reference;  // normalized restriction of the mu-density
  std::int64_t samples_in_window = 0;
  std::int64_t samples_total = 0;
  double l1_distance = 0.0;
};

// Time-average occupation histogram of a simulated ensemble against the
// invariant-density reference on a rectangular window (two dimensions only).
OccupationResult occupation_histogram(const CoefficientField& f, const SdeOptions& opts,
                                      const OccupationSpec& spec);

}  // namespace divlab
