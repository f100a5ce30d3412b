// Acceptance gate: one numbered end-to-end criterion per invocation
// (`acceptance N`, N in 1..12). Each check prints a single line
//
//   ACCEPTANCE <NN>_<name>: PASS|FAIL (<detail>)
//
// and the process exit status reports the verdict. Tolerances are pinned
// against independently computed reference values; loosening them is a
// regression, not a fix.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "divlab/assemble.hpp"
#include "divlab/criteria.hpp"
#include "divlab/field.hpp"
#include "divlab/grid.hpp"
#include "divlab/quadrature.hpp"
#include "divlab/report.hpp"
#include "divlab/scenarios.hpp"
#include "divlab/sde.hpp"
#include "divlab/semigroup.hpp"

using namespace divlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

void expect(Outcome& o, bool cond, const std::string& why) {
  if (!cond && o.pass) {
    o.pass = false;
    o.detail = why;
  }
}

std::vector<std::array<double, 3>> ball_points(int d, double radius, int count,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> g(-radius, radius);
  std::vector<std::array<double, 3>> pts;
  while (static_cast<int>(pts.size()) < count) {
    std::array<double, 3> p{0.0, 0.0, 0.0};
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      p[k] = g(rng);
      r2 += p[k] * p[k];
    }
    if (r2 <= radius * radius) pts.push_back(p);
  }
  return pts;
}

// Divergence-free drift on Lebesgue measure whose components vary along
// their own axes; used to exercise the first-order duality defect.
CoefficientField stream_field() {
  CoefficientField f;
  f.d = 2;
  f.name = "stream";
  f.rho = [](const double*) { return 1.0; };
  f.A = [](const double*, double* out) {
    out[0] = 1.0;
    out[1] = 0.0;
    out[2] = 0.0;
    out[3] = 1.0;
  };
  f.Bbar = [](const double* x, double* out) {
    out[0] = -std::sin(x[0]) * std::cos(x[1]);
    out[1] = std::cos(x[0]) * std::sin(x[1]);
  };
  f.grad_log_rho = [](const double*, double* g) { g[0] = g[1] = 0.0; };
  f.div_rows_A = [](const double*, double* g) { g[0] = g[1] = 0.0; };
  f.rho_A = f.A;
  f.a_diagonal = true;
  f.a_identity = true;
  f.mu_lebesgue = true;
  return f;
}

struct Combo {
  std::string id;
  int dim;
  std::string variant;
};

std::vector<Combo> planar_catalog() {
  return {{"flat-bm", 2, ""},
          {"gaussian-ou", 2, ""},
          {"example-4.3", 2, ""},
          {"gradient-drift", 2, "bounded"},
          {"gradient-drift", 2, "confining"},
          {"bump-chain-gradient", 2, ""},
          {"bump-chain-antisymmetric", 2, ""},
          {"davies", 2, ""}};
}

// ---------------------------------------------------------------------------
// 1. The computed drift matches the closed forms of three families.
Outcome c01_drift_identity() {
  Outcome o;
  double worst_flat = 0.0, worst_ou = 0.0, worst_zero = 0.0;
  for (int d : {2, 3}) {
    auto flat = make_scenario("flat-bm", d);
    for (const auto& p : ball_points(d, 5.0, 100, 101)) {
      double b[3];
      expect(o, beta_drift(flat, p.data(), b), "flat-bm drift flagged");
      for (int k = 0; k < d; ++k) worst_flat = std::max(worst_flat, std::abs(b[k]));
    }
  }
  expect(o, worst_flat == 0.0, fmt("flat drift not exactly zero: %g", worst_flat));

  auto ou = make_scenario("gaussian-ou", 2);
  for (const auto& p : ball_points(2, 5.0, 100, 102)) {
    double b[3];
    expect(o, beta_drift(ou, p.data(), b), "gaussian-ou drift flagged");
    for (int k = 0; k < 2; ++k)
      worst_ou = std::max(worst_ou, std::abs(b[k] - (-p[k])));
  }
  expect(o, worst_ou <= 1e-12, fmt("ou drift deviates from -x by %g", worst_ou));

  // The zero-drift family: diffusion growth exactly cancelled by the density.
  for (int d : {2, 3}) {
    auto e43 = make_scenario("example-4.3", d);
    int evaluated = 0;
    for (const auto& p : ball_points(d, 5.0, 100, 103)) {
      double b[3];
      if (!beta_drift(e43, p.data(), b)) continue;  // flagged near the origin
      ++evaluated;
      double nrm = 0.0;
      for (int k = 0; k < d; ++k) nrm += b[k] * b[k];
      worst_zero = std::max(worst_zero, std::sqrt(nrm));
    }
    expect(o, evaluated >= 90, fmt("example-4.3 d=%d: only %d/100 points evaluable", d,
                                   evaluated));
  }
  expect(o, worst_zero <= 1e-8, fmt("example-4.3 drift sup %g > 1e-8", worst_zero));
  if (o.pass)
    o.detail = fmt("flat sup 0, ou sup %.2e vs -x, zero-drift sup %.2e", worst_ou,
                   worst_zero);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Discrete duality: exact for drift-free fields, first-order in h with a
//    divergence-free drift.
Outcome c02_duality() {
  Outcome o;
  double worst = 0.0;
  std::string worst_id = "-";
  auto measure = [&](const CoefficientField& f, const std::string& id) {
    auto g = make_grid(f.d, 4.0, 0.2);
    AssembleOptions ao;
    ao.build_dual = true;
    auto op = assemble(f, g, ao);
    const double r = duality_residual(op, 50, 42);
    if (r > worst) {
      worst = r;
      worst_id = id;
    }
  };
  for (const auto& c : planar_catalog())
    measure(make_scenario(c.id, c.dim, c.variant), run_slug(c.id, c.dim, c.variant));
  measure(make_scenario("flat-bm", 3), "flat-bm-d3");
  expect(o, worst <= 1e-10,
         fmt("drift-free duality defect %g at %s", worst, worst_id.c_str()));

  auto sf = stream_field();
  std::vector<double> res;
  for (double h : {0.2, 0.1, 0.05}) {
    AssembleOptions ao;
    ao.build_dual = true;
    auto op = assemble(sf, make_grid(2, 4.0, h), ao);
    res.push_back(duality_residual(op, 25, 42));
  }
  const double slope = std::log2(res[0] / res[2]) / 2.0;
  expect(o, res[0] > 1e-4, fmt("stream defect %g unexpectedly small", res[0]));
  expect(o, slope >= 0.9,
         fmt("stream defect order %.3f < 0.9 (res %.3e %.3e %.3e)", slope, res[0],
             res[1], res[2]));
  if (o.pass)
    o.detail = fmt("drift-free worst %.2e (%s); stream order %.3f", worst,
                   worst_id.c_str(), slope);
  return o;
}

// ---------------------------------------------------------------------------
// 3. The assembled operator annihilates mu in the weak sense: column sums
//    against interior test functions vanish at machine scale.
Outcome c03_invariance_residual() {
  Outcome o;
  const double h = 0.1;
  auto g = make_grid(2, 3.0, h);
  const std::array<std::array<double, 2>, 5> centers = {
      {{0.0, 0.0}, {1.0, 0.5}, {-1.0, 1.0}, {0.5, -1.5}, {-0.8, -0.6}}};
  double worst = 0.0;
  std::string worst_id = "-";
  for (const auto& c : planar_catalog()) {
    auto f = make_scenario(c.id, c.dim, c.variant);
    auto op = assemble(f, g, AssembleOptions{});
    for (const auto& ctr : centers) {
      std::vector<double> phi(static_cast<std::size_t>(g.n), 0.0);
      int mi[3];
      double x[3];
      for (std::int64_t i = 0; i < g.n; ++i) {
        g.multi(i, mi);
        if (g.boundary_distance(mi) <= 2) continue;
        g.point(mi, x);
        const double dx = x[0] - ctr[0], dy = x[1] - ctr[1];
        phi[static_cast<std::size_t>(i)] = std::exp(-(dx * dx + dy * dy) / 0.49);
      }
      const double r = std::abs(invariance_residual(op, phi));
      if (r > worst) {
        worst = r;
        worst_id = run_slug(c.id, c.dim, c.variant);
      }
    }
  }
  expect(o, worst <= 1e-2 * h,
         fmt("invariance residual %g at %s exceeds %.1e", worst, worst_id.c_str(),
             1e-2 * h));
  if (o.pass) o.detail = fmt("worst residual %.2e (%s), bound %.1e", worst,
                             worst_id.c_str(), 1e-2 * h);
  return o;
}

// ---------------------------------------------------------------------------
// 4. Conservative family: truncated-box mass returns to 1 as the box grows.
Outcome c04_mass_conservative() {
  Outcome o;
  auto f = make_scenario("flat-bm", 2);
  MassProbeSpec spec;
  spec.radii = {2.0, 4.0, 6.0, 8.0};
  spec.h = 0.25;
  spec.T = 1.0;
  spec.dt = 0.025;
  auto r = conservativeness_probe(f, spec);
  expect(o, r.verdict == "conservative-signature",
         fmt("verdict '%s' != conservative-signature", r.verdict.c_str()));
  expect(o, r.final_mass.size() == 4, "expected four radii");
  if (r.final_mass.size() == 4) {
    expect(o, r.final_mass[1] >= 0.999, fmt("mass(R=4) = %.8f < 0.999", r.final_mass[1]));
    expect(o, r.final_mass[3] >= 0.9999999,
           fmt("mass(R=8) = %.10f < 1-1e-7", r.final_mass[3]));
    for (std::size_t i = 1; i < r.deficit.size(); ++i)
      expect(o, r.deficit[i] < r.deficit[i - 1], "mass deficit not strictly decreasing");
    expect(o, r.overshoot <= 1e-8, fmt("mass overshoot %g", r.overshoot));
  }
  if (o.pass)
    o.detail = fmt("final mass %.6f / %.6f / %.8f / %.10f, verdict=%s", r.final_mass[0],
                   r.final_mass[1], r.final_mass[2], r.final_mass[3], r.verdict.c_str());
  return o;
}

// ---------------------------------------------------------------------------
// 5. Explosive family: the escaped mass does not return as the box grows, and
//    the plateau is stable under time-step and mesh refinement.
Outcome c05_mass_defect() {
  Outcome o;
  auto f = make_scenario("davies", 2);
  auto run = [&](double h, double dt) {
    MassProbeSpec spec;
    spec.radii = {8.0, 16.0, 32.0};
    spec.h = h;
    spec.T = 1.0;
    spec.dt = dt;
    return conservativeness_probe(f, spec);
  };
  auto coarse = run(0.5, 0.05);
  auto fine = run(0.25, 0.025);
  for (const auto* r : {&coarse, &fine}) {
    expect(o, r->verdict == "mass-defect",
           fmt("verdict '%s' != mass-defect", r->verdict.c_str()));
    for (double m : r->final_mass)
      expect(o, m < 0.5, fmt("plateau mass %.4f not clearly below 1", m));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const double gap = std::abs(coarse.final_mass[i] - fine.final_mass[i]);
    expect(o, gap <= 0.05,
           fmt("refinement moved plateau %zu by %.4f (> 0.05): not converged", i, gap));
  }
  if (o.pass)
    o.detail = fmt("plateaus h=0.5: %.4f/%.4f/%.4f, h=0.25: %.4f/%.4f/%.4f",
                   coarse.final_mass[0], coarse.final_mass[1], coarse.final_mass[2],
                   fine.final_mass[0], fine.final_mass[1], fine.final_mass[2]);
  return o;
}

// ---------------------------------------------------------------------------
// 6. Resolvent growth separates the planar recurrent regime from the
//    transient three-dimensional one.
Outcome c06_green_signatures() {
  Outcome o;
  auto r2 = green_probe(make_scenario("flat-bm", 2), GreenProbeSpec{});
  expect(o, r2.verdict == "recurrent-signature",
         fmt("d=2 verdict '%s'", r2.verdict.c_str()));
  double min_ratio = 1e300;
  for (double q : r2.ratios) min_ratio = std::min(min_ratio, q);
  expect(o, min_ratio >= 1.15, fmt("d=2 min growth ratio %.4f < 1.15", min_ratio));

  auto spec3 = scenario_defaults("flat-bm", 3).green;
  auto r3 = green_probe(make_scenario("flat-bm", 3), spec3);
  expect(o, r3.verdict == "transient-signature",
         fmt("d=3 verdict '%s'", r3.verdict.c_str()));
  expect(o, !r3.ratios.empty(), "d=3 ratios empty");
  const double last = r3.ratios.empty() ? 0.0 : r3.ratios.back();
  expect(o, std::abs(last - 1.0) <= 0.02,
         fmt("d=3 final ratio %.6f not within 2%% of 1", last));
  if (o.pass)
    o.detail = fmt("d2 min ratio %.4f (recurrent), d3 final ratio %.6f (transient)",
                   min_ratio, last);
  return o;
}

// ---------------------------------------------------------------------------
// 7. Mean exit time of standard Brownian motion from the unit ball: R^2/d.
Outcome c07_exit_law() {
  Outcome o;
  double m2 = 0.0, m3 = 0.0;
  for (int d : {2, 3}) {
    auto f = make_scenario("flat-bm", d);
    SdeOptions opts;
    opts.dt = 1e-4;
    opts.T = 10.0;
    opts.paths = 10000;
    opts.seed = 1;
    auto r = exit_law(f, 1.0, opts);
    expect(o, r.censored == 0, fmt("d=%d: %d paths never exited", d, r.censored));
    const double target = 1.0 / d;
    expect(o, std::abs(r.mean_exit_time - target) <= 0.05 * target,
           fmt("d=%d mean exit %.5f vs %.5f (5%% band)", d, r.mean_exit_time, target));
    expect(o, r.mean_exit_radius >= 1.0 && r.mean_exit_radius <= 1.02,
           fmt("d=%d exit radius %.5f outside [1, 1.02]", d, r.mean_exit_radius));
    (d == 2 ? m2 : m3) = r.mean_exit_time;
  }
  if (o.pass) o.detail = fmt("mean exit d2 %.5f (ref 0.5), d3 %.5f (ref 1/3)", m2, m3);
  return o;
}

// ---------------------------------------------------------------------------
// 8. Ergodic occupation: the time-average histogram reproduces the invariant
//    density far better than a flat profile would.
Outcome c08_occupation_ou() {
  Outcome o;
  auto f = make_scenario("gaussian-ou", 2);
  SdeOptions opts;
  opts.dt = 1e-3;
  opts.T = 50.0;
  opts.paths = 800;
  opts.seed = 1;
  OccupationSpec spec;
  spec.win_lo = {-3.0, -3.0};
  spec.win_hi = {3.0, 3.0};
  spec.bins_x = 16;
  spec.bins_y = 16;
  auto r = occupation_histogram(f, opts, spec);
  expect(o, r.samples_in_window >= 100000,
         fmt("only %lld window samples", static_cast<long long>(r.samples_in_window)));
  expect(o, r.l1_distance <= 0.05, fmt("L1(hist, mu) = %.6f > 0.05", r.l1_distance));
  double l1_uniform = 0.0;
  const double u = 1.0 / (spec.bins_x * spec.bins_y);
  for (double v : r.histogram) l1_uniform += std::abs(v - u);
  expect(o, l1_uniform >= 0.3,
         fmt("uniform contrast %.4f too small to be informative", l1_uniform));
  if (o.pass)
    o.detail = fmt("L1 vs mu %.6f, L1 vs uniform %.4f, %lld window samples",
                   r.l1_distance, l1_uniform,
                   static_cast<long long>(r.samples_in_window));
  return o;
}

// ---------------------------------------------------------------------------
// 9. The singular bump chain end-to-end: the criteria conclude a unique
//    invariant measure, and tamed paths actually occupy it.
Outcome c09_bump_chain_pipeline() {
  Outcome o;
  auto f = make_scenario("bump-chain-gradient", 2);
  auto mu = estimate_mu(f, MuQuadSpec{});
  auto verdicts = run_all_criteria(f, mu, CriteriaSpec{});
  std::map<CriterionId, Verdict> vm;
  for (const auto& cv : verdicts) {
    expect(o, cv.error.empty(),
           fmt("%s raised: %s", criterion_name(cv.id), cv.error.c_str()));
    vm[cv.id] = cv.verdict;
  }
  expect(o, vm[CriterionId::THM31_I] == Verdict::holds, "THM31_I did not hold");
  expect(o, vm[CriterionId::PROP44_I] == Verdict::holds,
         "PROP44_I (uniqueness) did not hold");

  auto rd = scenario_defaults("bump-chain-gradient", 2);
  auto occ = occupation_histogram(f, rd.sde, rd.occupation);
  expect(o, occ.samples_in_window >= 100000,
         fmt("only %lld window samples", static_cast<long long>(occ.samples_in_window)));
  expect(o, occ.l1_distance <= 0.1,
         fmt("L1(hist, mu) = %.6f > 0.1 on the chain window", occ.l1_distance));
  if (o.pass)
    o.detail = fmt("THM31_I+PROP44_I hold; occupation L1 %.6f with %lld samples",
                   occ.l1_distance, static_cast<long long>(occ.samples_in_window));
  return o;
}

// ---------------------------------------------------------------------------
// 10. The full built-in plan runs through the CLI and every expected
//     conclusion is met with no contradictions.
Outcome c10_run_all() {
  Outcome o;
  const std::string dir = (fs::temp_directory_path() / "divlab_acc_runall").string();
  std::error_code ec;
  fs::remove_all(dir, ec);
  ensure_directory(dir);
  const std::string cmd = std::string(DIVLAB_BIN) + " run-all --out " + dir +
                          " --seed 1 > " + dir + "/stdout.log 2>&1";
  const int status = std::system(cmd.c_str());
  expect(o, status != -1 && WIFEXITED(status), "CLI did not exit normally");
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  expect(o, code == 0, fmt("run-all exit code %d (see %s/stdout.log)", code,
                           dir.c_str()));

  const std::string summary_path = dir + "/summary.txt";
  expect(o, fs::exists(summary_path), "summary.txt missing");
  std::string summary;
  if (fs::exists(summary_path)) {
    FILE* in = std::fopen(summary_path.c_str(), "rb");
    char buf[4096];
    size_t got;
    while (in && (got = std::fread(buf, 1, sizeof buf, in)) > 0) summary.append(buf, got);
    if (in) std::fclose(in);
  }
  expect(o, summary.find("total: exit=0") != std::string::npos,
         "summary does not report total exit=0");
  int rows = 0;
  for (const auto& pe : run_all_plan()) {
    const std::string rep =
        dir + "/" + run_slug(pe.scenario, pe.dim, pe.variant) + "/report.txt";
    if (fs::exists(rep)) ++rows;
    expect(o, fs::exists(rep), "missing report: " + rep);
  }
  if (o.pass) o.detail = fmt("exit 0, %d/10 reports written, summary total exit=0", rows);
  return o;
}

// ---------------------------------------------------------------------------
// 11. Conservativeness is insensitive to the scale of the anti-symmetric
//     part: no verdict flip across two hundred scales.
Outcome c11_scaling_monotonicity() {
  Outcome o;
  auto mu = estimate_mu(bump_antisymmetric_scaled(2, 1.0), MuQuadSpec{});
  double min_margin = 1e300, max_margin = 0.0;
  int flips = 0;
  for (int k = 1; k <= 200; ++k) {
    const double s = k / 200.0;
    auto f = bump_antisymmetric_scaled(2, s);
    auto cv = check_thm31_i(f, mu, CriteriaSpec{});
    if (cv.verdict != Verdict::holds) {
      ++flips;
      expect(o, false, fmt("verdict flipped to '%s' at scale %.3f",
                           verdict_name(cv.verdict), s));
    }
    if (cv.fit) {
      min_margin = std::min(min_margin, cv.fit->margin);
      max_margin = std::max(max_margin, cv.fit->margin);
    }
  }
  expect(o, min_margin > 0.0, "margin not strictly positive across scales");
  if (o.pass)
    o.detail = fmt("200/200 scales hold, margin in [%.4f, %.4f]", min_margin,
                   max_margin);
  return o;
}

// ---------------------------------------------------------------------------
// 12. The sectorial comparison genuinely fails on the unbounded chain, with a
//     concrete witness point, while conservativeness still holds.
Outcome c12_sectorial_witness() {
  Outcome o;
  auto f = make_scenario("bump-chain-antisymmetric", 2);
  auto mu = estimate_mu(f, MuQuadSpec{});
  auto verdicts = run_all_criteria(f, mu, CriteriaSpec{});
  const CriterionVerdict* sectorial = nullptr;
  for (const auto& cv : verdicts) {
    expect(o, cv.error.empty(),
           fmt("%s raised: %s", criterion_name(cv.id), cv.error.c_str()));
    if (cv.id == CriterionId::CMP_SECTORIAL) sectorial = &cv;
    const bool expect_fail =
        cv.id == CriterionId::CMP_SECTORIAL || cv.id == CriterionId::THM31_II;
    const Verdict want = expect_fail ? Verdict::fails_on_witness : Verdict::holds;
    expect(o, cv.verdict == want,
           fmt("%s: verdict '%s', expected '%s'", criterion_name(cv.id),
               verdict_name(cv.verdict), verdict_name(want)));
  }
  expect(o, sectorial != nullptr, "CMP_SECTORIAL verdict missing");
  if (sectorial) {
    expect(o, sectorial->witness.has_value(), "no witness attached");
    if (sectorial->witness) {
      const Witness& w = *sectorial->witness;
      expect(o, w.x.size() == 2, "witness point has wrong dimension");
      expect(o, std::isfinite(w.lhs) && std::isfinite(w.rhs), "witness values not finite");
      expect(o, w.lhs > w.rhs,
             fmt("witness does not violate the bound: lhs %.4f <= rhs %.4f", w.lhs,
                 w.rhs));
      if (o.pass)
        o.detail = fmt("witness at (%.3f, %.3f): ratio %.3f exceeds bound %.3f",
                       w.x[0], w.x[1], w.lhs, w.rhs);
    }
  }
  return o;
}

const char* kNames[12] = {
    "01_drift_identity",     "02_duality",
    "03_invariance_residual", "04_mass_conservative",
    "05_mass_defect",        "06_green_signatures",
    "07_exit_law",           "08_occupation_ou",
    "09_bump_chain_pipeline", "10_run_all",
    "11_scaling_monotonicity", "12_sectorial_witness"};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..12>\n");
    return 2;
  }
  const int n = std::atoi(argv[1]);
  if (n < 1 || n > 12) {
    std::fprintf(stderr, "criterion out of range: %s\n", argv[1]);
    return 2;
  }
  Outcome o;
  try {
    switch (n) {
      case 1: o = c01_drift_identity(); break;
      case 2: o = c02_duality(); break;
      case 3: o = c03_invariance_residual(); break;
      case 4: o = c04_mass_conservative(); break;
      case 5: o = c05_mass_defect(); break;
      case 6: o = c06_green_signatures(); break;
      case 7: o = c07_exit_law(); break;
      case 8: o = c08_occupation_ou(); break;
      case 9: o = c09_bump_chain_pipeline(); break;
      case 10: o = c10_run_all(); break;
      case 11: o = c11_scaling_monotonicity(); break;
      case 12: o = c12_sectorial_witness(); break;
    }
  } catch (const Error& e) {
    o.pass = false;
    o.detail = std::string(err_kind_name(e.kind())) + ": " + e.what();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = e.what();
  }
  std::printf("ACCEPTANCE %s: %s (%s)\n", kNames[n - 1], o.pass ? "PASS" : "FAIL",
              o.detail.c_str());
  return o.pass ? 0 : 1;
}
