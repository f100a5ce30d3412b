#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <omp.h>

#include "divlab/scenarios.hpp"
#include "divlab/sde.hpp"
#include "doctest.h"

using namespace divlab;

namespace {

// crossing_times uses NaN for radii a path never reached, so comparisons must
// be bitwise (NaN == NaN is false, memcmp over the bytes is not).
bool bits_equal(const double* a, const double* b, size_t n) {
  return std::memcmp(a, b, n * sizeof(double)) == 0;
}

bool ensembles_bitwise_equal(const EnsembleSummary& a, const EnsembleSummary& b) {
  if (a.paths != b.paths || a.aborted != b.aborted) return false;
  if (!bits_equal(&a.mean_final_radius, &b.mean_final_radius, 1)) return false;
  if (a.records.size() != b.records.size()) return false;
  for (size_t i = 0; i < a.records.size(); ++i) {
    const PathRecord& ra = a.records[i];
    const PathRecord& rb = b.records[i];
    if (ra.aborted != rb.aborted) return false;
    if (ra.drift_flagged_steps != rb.drift_flagged_steps) return false;
    if (!bits_equal(ra.final_x.data(), rb.final_x.data(), ra.final_x.size())) return false;
    if (!bits_equal(&ra.final_time, &rb.final_time, 1)) return false;
    if (ra.crossing_times.size() != rb.crossing_times.size()) return false;
    if (!bits_equal(ra.crossing_times.data(), rb.crossing_times.data(),
                    ra.crossing_times.size()))
      return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("mc") {

TEST_CASE("planar exit times from the unit ball match the harmonic mean 1/2") {
  auto f = make_scenario("flat-bm", 2, "");
  SdeOptions o;
  o.dt = 2e-4;
  o.T = 10.0;
  o.paths = 4000;
  o.seed = 11;
  ExitLawResult e = exit_law(f, 1.0, o);
  CHECK(e.censored == 0);
  CHECK(std::abs(e.mean_exit_time - 0.5) <= 0.02);
  CHECK(e.std_error < 0.01);
  CHECK(e.mean_exit_radius >= 1.0);  // detected just after the crossing
  CHECK(e.mean_exit_radius < 1.05);
}

TEST_CASE("spatial exit times in d=3 match 1/3") {
  auto f = make_scenario("flat-bm", 3, "");
  SdeOptions o;
  o.dt = 2e-4;
  o.T = 10.0;
  o.paths = 4000;
  o.seed = 11;
  ExitLawResult e = exit_law(f, 1.0, o);
  CHECK(e.censored == 0);
  CHECK(std::abs(e.mean_exit_time - 1.0 / 3.0) <= 0.02);
}

TEST_CASE("exit law validates its inputs") {
  auto f = make_scenario("flat-bm", 2, "");
  SdeOptions o;
  o.dt = 1e-3;
  o.T = 0.05;
  o.paths = 20;
  CHECK_THROWS_AS(exit_law(f, -1.0, o), Error);

  SdeOptions outside = o;
  outside.x0 = {50.0, 0.0, 0.0};
  try {
    exit_law(f, 1.0, outside);
    FAIL("expected a precondition error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::precondition);
  }

  // Nobody leaves a huge ball in five hundredths of a second.
  try {
    exit_law(f, 50.0, o);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::data);
  }
}

TEST_CASE("option validation rejects malformed ladders and step sizes") {
  auto f = make_scenario("flat-bm", 2, "");
  SdeOptions o;
  o.dt = 0.0;
  CHECK_THROWS_AS(simulate_ensemble(f, o), Error);
  o.dt = 1e-3;
  o.T = 1.0;
  o.paths = 0;
  CHECK_THROWS_AS(simulate_ensemble(f, o), Error);
  o.paths = 4;
  o.ladder = {2.0, 2.0};
  try {
    simulate_ensemble(f, o);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::schema);
  }
}

TEST_CASE("crossing ladder statistics are ordered and per-path times increase") {
  auto f = make_scenario("flat-bm", 2, "");
  SdeOptions o;
  o.dt = 1e-3;
  o.T = 6.0;
  o.paths = 48;
  o.seed = 9;
  o.ladder = {0.5, 1.0, 2.0};
  EnsembleSummary s = simulate_ensemble(f, o);
  REQUIRE(s.crossing_fraction.size() == 3);
  // Larger radii are crossed by no more paths, and no earlier.
  CHECK(s.crossing_fraction[0] >= s.crossing_fraction[1]);
  CHECK(s.crossing_fraction[1] >= s.crossing_fraction[2]);
  CHECK(s.crossing_fraction[0] == doctest::Approx(1.0));
  for (const auto& rec : s.records) {
    for (size_t j = 1; j < rec.crossing_times.size(); ++j) {
      if (std::isnan(rec.crossing_times[j])) continue;
      REQUIRE_FALSE(std::isnan(rec.crossing_times[j - 1]));
      CHECK(rec.crossing_times[j] >= rec.crossing_times[j - 1]);
    }
  }
  CHECK(s.median_crossing[0] < s.median_crossing[1]);
}

TEST_CASE("ensembles are reproducible: same seed bitwise, new seed different") {
  auto f = make_scenario("flat-bm", 2, "");
  SdeOptions o;
  o.dt = 1e-3;
  o.T = 6.0;
  o.paths = 48;
  o.seed = 9;
  o.ladder = {0.5, 1.0, 2.0};
  EnsembleSummary a = simulate_ensemble(f, o);
  EnsembleSummary b = simulate_ensemble(f, o);
  CHECK(ensembles_bitwise_equal(a, b));

  SdeOptions o2 = o;
  o2.seed = 10;
  EnsembleSummary c = simulate_ensemble(f, o2);
  CHECK_FALSE(ensembles_bitwise_equal(a, c));
}

TEST_CASE("ensembles are bitwise independent of the OpenMP thread count") {
  auto f = make_scenario("flat-bm", 2, "");
  SdeOptions o;
  o.dt = 1e-3;
  o.T = 6.0;
  o.paths = 48;
  o.seed = 9;
  o.ladder = {0.5, 1.0, 2.0};
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  EnsembleSummary a = simulate_ensemble(f, o);
  omp_set_num_threads(3);
  EnsembleSummary b = simulate_ensemble(f, o);
  omp_set_num_threads(saved);
  CHECK(ensembles_bitwise_equal(a, b));
}

TEST_CASE("fast-growing diffusion shows the explosive signature under taming") {
  auto f = make_scenario("davies", 2, "");
  SdeOptions o;
  o.dt = 2e-4;
  o.T = 5.0;
  o.paths = 100;
  o.seed = 2;
  o.taming = true;
  o.ladder = {2.0, 4.0, 8.0, 16.0};
  o.stop_after_ladder = true;
  EnsembleSummary s = simulate_ensemble(f, o);
  CHECK(s.explosion_verdict == "explosive-signature");
  CHECK(s.aborted == 0);
  for (double fr : s.crossing_fraction) CHECK(fr == doctest::Approx(1.0));
  // stop_after_ladder cuts the runs short once the top radius is crossed.
  for (const auto& rec : s.records) CHECK(rec.final_time < o.T);
}

TEST_CASE("confined dynamics shows no explosion signature") {
  auto f = make_scenario("gaussian-ou", 2, "");
  SdeOptions o;
  o.dt = 1e-3;
  o.T = 10.0;
  o.paths = 100;
  o.seed = 2;
  o.ladder = {2.0, 4.0, 6.0};
  EnsembleSummary s = simulate_ensemble(f, o);
  CHECK(s.explosion_verdict == "no-explosion-signature");
  CHECK(s.crossing_fraction.back() == doctest::Approx(0.0));
  CHECK(s.aborted == 0);
  CHECK(s.mean_final_radius < 4.0);
}

TEST_CASE("occupation histogram of the Gaussian matches its own density") {
  auto f = make_scenario("gaussian-ou", 2, "");
  SdeOptions o;
  o.dt = 1e-3;
  o.T = 30.0;
  o.paths = 150;
  o.seed = 4;
  OccupationSpec spec;
  spec.win_lo = {-3.0, -3.0};
  spec.win_hi = {3.0, 3.0};
  spec.bins_x = spec.bins_y = 24;
  OccupationResult r = occupation_histogram(f, o, spec);
  CHECK(r.samples_total == 420000);  // 150 paths x 2800 retained steps
  CHECK(r.samples_in_window >= 400000);
  CHECK(r.l1_distance <= 0.10);

  // The histogram is decisively non-uniform: the same L1 metric against the
  // uniform reference stays large, so the agreement above carries power.
  double lu = 0.0;
  const double unif = 1.0 / r.reference.size();
  for (double q : r.histogram) lu += std::abs(q - unif);
  CHECK(lu >= 0.3);

  // Histogram and reference are probability vectors on the window.
  double sh = 0.0, sr = 0.0;
  for (double q : r.histogram) sh += q;
  for (double q : r.reference) sr += q;
  CHECK(sh == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sr == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("occupation histogram reports an empty window as a data error") {
  auto f = make_scenario("gaussian-ou", 2, "");
  SdeOptions o;
  o.dt = 1e-3;
  o.T = 5.0;
  o.paths = 10;
  OccupationSpec spec;
  spec.win_lo = {100.0, 100.0};
  spec.win_hi = {101.0, 101.0};
  try {
    occupation_histogram(f, o, spec);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::data);
    CHECK(std::string(e.what()).find("window") != std::string::npos);
  }
}

TEST_CASE("occupation histogram is restricted to the planar case") {
  auto f = make_scenario("gaussian-ou", 3, "");
  SdeOptions o;
  o.dt = 1e-3;
  o.T = 1.0;
  o.paths = 2;
  try {
    occupation_histogram(f, o, OccupationSpec{});
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::schema);
  }
}

}  // TEST_SUITE
