#include "divlab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "divlab/linalg.hpp"

namespace divlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Stepper {
  const CoefficientField& f;
  const SdeOptions& o;
  int d;
  std::mt19937_64 rng;
  std::normal_distribution<double> gauss;
  double x[3] = {0.0, 0.0, 0.0};
  double t = 0.0;
  bool aborted = false;
  std::int64_t flagged = 0;
  double sqdt;

  Stepper(const CoefficientField& field, const SdeOptions& opts, int path)
      : f(field), o(opts), d(field.d), rng(mix_seed(opts.seed, static_cast<std::uint64_t>(path))) {
    for (int k = 0; k < d; ++k) x[k] = opts.x0[k];
    sqdt = std::sqrt(opts.dt);
  }

  // One Euler-Maruyama step; returns false once the path aborts.
  bool step() {
    double b[3] = {0.0, 0.0, 0.0};
    if (!beta_drift(f, x, b)) {
      ++flagged;
      for (int k = 0; k < d; ++k) b[k] = 0.0;
    }
    if (f.has_B()) {
      double bb[3];
      eval_B(f, x, bb);
      for (int k = 0; k < d; ++k) b[k] += bb[k];
    }
    double scale = o.dt;
    if (o.taming) scale = o.dt / (1.0 + sqdt * norm2(b, d));

    double xi[3];
    for (int k = 0; k < d; ++k) xi[k] = gauss(rng);
    double dx[3];
    if (f.a_identity) {
      for (int k = 0; k < d; ++k) dx[k] = sqdt * xi[k];
    } else {
      double a[9];
      eval_A(f, x, a);
      if (!cholesky(a, d)) {
        aborted = true;
        return false;
      }
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int l = 0; l <= k; ++l) s += a[k * d + l] * xi[l];
        dx[k] = sqdt * s;
      }
    }
    for (int k = 0; k < d; ++k) x[k] += scale * b[k] + dx[k];
    t += o.dt;
    if (!all_finite(x, d) || norm2(x, d) > o.abort_radius) {
      aborted = true;
      return false;
    }
    return true;
  }
};

void validate(const CoefficientField& f, const SdeOptions& o) {
  if (f.d < 1 || f.d > 3) fail(ErrKind::schema, "sde: dimension must be at most 3");
  if (!(o.dt > 0.0) || !(o.T >= o.dt)) fail(ErrKind::schema, "sde: need 0 < dt <= T");
  if (o.paths < 1) fail(ErrKind::schema, "sde: need at least one path");
  for (size_t j = 1; j < o.ladder.size(); ++j)
    if (!(o.ladder[j] > o.ladder[j - 1]))
      fail(ErrKind::schema, "sde: ladder radii must be strictly increasing");
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

EnsembleSummary simulate_ensemble(const CoefficientField& f, const SdeOptions& opts) {
  validate(f, opts);
  const std::int64_t steps = std::llround(opts.T / opts.dt);
  const size_t nl = opts.ladder.size();

  EnsembleSummary out;
  out.paths = opts.paths;
  out.ladder = opts.ladder;
  out.records.resize(opts.paths);

#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < opts.paths; ++p) {
    Stepper s(f, opts, p);
    PathRecord rec;
    rec.crossing_times.assign(nl, kNaN);
    size_t next_cross = 0;
    while (next_cross < nl && norm2(s.x, s.d) >= opts.ladder[next_cross])
      rec.crossing_times[next_cross++] = 0.0;
    for (std::int64_t k = 0; k < steps; ++k) {
      if (!s.step()) {
        rec.aborted = true;
        break;
      }
      while (next_cross < nl && norm2(s.x, s.d) >= opts.ladder[next_cross])
        rec.crossing_times[next_cross++] = s.t;
      if (opts.stop_after_ladder && nl > 0 && next_cross == nl) break;
    }
    for (int k = 0; k < s.d; ++k) rec.final_x[k] = s.x[k];
    rec.final_time = s.t;
    rec.drift_flagged_steps = s.flagged;
    out.records[p] = std::move(rec);
  }

  double radius_sum = 0.0;
  int alive = 0;
  for (const PathRecord& rec : out.records) {
    if (rec.aborted) {
      ++out.aborted;
    } else {
      radius_sum += norm2(rec.final_x.data(), f.d);
      ++alive;
    }
  }
  out.mean_final_radius = alive > 0 ? radius_sum / alive : 0.0;

  for (size_t j = 0; j < nl; ++j) {
    std::vector<double> times;
    for (const PathRecord& rec : out.records)
      if (!std::isnan(rec.crossing_times[j])) times.push_back(rec.crossing_times[j]);
    out.crossing_fraction.push_back(static_cast<double>(times.size()) / opts.paths);
    out.median_crossing.push_back(median_of(std::move(times)));
  }

  if (nl > 0) {
    const double top_frac = out.crossing_fraction.back();
    const double top_med = out.median_crossing.back();
    if (top_frac >= 0.9 && std::isfinite(top_med) && top_med <= 0.75 * opts.T)
      out.explosion_verdict = "explosive-signature";
    else if (top_frac <= 0.01)
      out.explosion_verdict = "no-explosion-signature";
    else
      out.explosion_verdict = "inconclusive";
  }
  return out;
}

ExitLawResult exit_law(const CoefficientField& f, double radius, const SdeOptions& opts) {
  validate(f, opts);
  if (!(radius > 0.0)) fail(ErrKind::schema, "exit_law: radius must be positive");
  if (norm2(opts.x0.data(), f.d) >= radius)
    fail(ErrKind::precondition, "exit_law: start point lies outside the ball");
  const std::int64_t steps = std::llround(opts.T / opts.dt);

  std::vector<double> texit(opts.paths, kNaN), rexit(opts.paths, kNaN);
  std::vector<char> bad(opts.paths, 0);

#pragma omp parallel for schedule(dynamic)
  for (int p = 0; p < opts.paths; ++p) {
    Stepper s(f, opts, p);
    for (std::int64_t k = 0; k < steps; ++k) {
      if (!s.step()) {
        bad[p] = 1;
        break;
      }
      if (norm2(s.x, s.d) >= radius) {
        texit[p] = s.t;
        rexit[p] = norm2(s.x, s.d);
        break;
      }
    }
  }

  ExitLawResult res;
  double sum = 0.0, sum2 = 0.0, rsum = 0.0;
  int n = 0;
  for (int p = 0; p < opts.paths; ++p) {
    if (bad[p]) {
      ++res.censored;
      continue;
    }
    if (std::isnan(texit[p])) {
      ++res.censored;
      continue;
    }
    sum += texit[p];
    sum2 += texit[p] * texit[p];
    rsum += rexit[p];
    ++n;
  }
  if (n == 0) fail(ErrKind::data, "exit_law: no path left the ball before the horizon");
  res.mean_exit_time = sum / n;
  res.mean_exit_radius = rsum / n;
  if (n > 1) {
    const double var = (sum2 - sum * sum / n) / (n - 1);
    res.std_error = std::sqrt(std::max(var, 0.0) / n);
  }
  return res;
}

OccupationResult occupation_histogram(const CoefficientField& f, const SdeOptions& opts,
                                      const OccupationSpec& spec) {
  validate(f, opts);
  if (f.d != 2) fail(ErrKind::schema, "occupation_histogram: implemented for dimension 2");
  if (spec.bins_x < 1 || spec.bins_y < 1 || spec.thin < 1 || spec.ref_subsample < 1)
    fail(ErrKind::schema, "occupation_histogram: invalid binning parameters");
  const double wx = spec.win_hi[0] - spec.win_lo[0];
  const double wy = spec.win_hi[1] - spec.win_lo[1];
  if (!(wx > 0.0) || !(wy > 0.0))
    fail(ErrKind::schema, "occupation_histogram: empty window");

  const int nb = spec.bins_x * spec.bins_y;
  const double bx = wx / spec.bins_x, by = wy / spec.bins_y;
  const std::int64_t steps = std::llround(opts.T / opts.dt);

  std::vector<std::int64_t> counts(nb, 0);
  std::int64_t in_window = 0, total = 0;

#pragma omp parallel
  {
    std::vector<std::int64_t> local(nb, 0);
    std::int64_t local_in = 0, local_total = 0;
#pragma omp for schedule(dynamic) nowait
    for (int p = 0; p < opts.paths; ++p) {
      Stepper s(f, opts, p);
      for (std::int64_t k = 1; k <= steps; ++k) {
        if (!s.step()) break;
        if (s.t < spec.burn_in || k % spec.thin != 0) continue;
        ++local_total;
        const double ux = (s.x[0] - spec.win_lo[0]) / bx;
        const double uy = (s.x[1] - spec.win_lo[1]) / by;
        if (ux < 0.0 || uy < 0.0) continue;
        const int ix = static_cast<int>(ux), iy = static_cast<int>(uy);
        if (ix >= spec.bins_x || iy >= spec.bins_y) continue;
        ++local[iy * spec.bins_x + ix];
        ++local_in;
      }
    }
#pragma omp critical
    {
      for (int b = 0; b < nb; ++b) counts[b] += local[b];
      in_window += local_in;
      total += local_total;
    }
  }

  OccupationResult res;
  res.samples_in_window = in_window;
  res.samples_total = total;
  if (in_window == 0)
    fail(ErrKind::data, "occupation_histogram: no samples landed in the window");
  res.histogram.assign(nb, 0.0);
  for (int b = 0; b < nb; ++b)
    res.histogram[b] = static_cast<double>(counts[b]) / static_cast<double>(in_window);

  // Reference: the mu-density integrated over each bin by midpoint subsampling,
  // normalized across the window.
  res.reference.assign(nb, 0.0);
  const int ss = spec.ref_subsample;
  double ref_total = 0.0;
  for (int iy = 0; iy < spec.bins_y; ++iy) {
    for (int ix = 0; ix < spec.bins_x; ++ix) {
      double acc = 0.0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          double pt[3] = {spec.win_lo[0] + (ix + (sx + 0.5) / ss) * bx,
                          spec.win_lo[1] + (iy + (sy + 0.5) / ss) * by, 0.0};
          const double r = f.rho(pt);
          if (!std::isfinite(r) || r < 0.0)
            fail(ErrKind::evaluation, "occupation_histogram: density non-finite on window");
          acc += r;
        }
      }
      res.reference[iy * spec.bins_x + ix] = acc;
      ref_total += acc;
    }
  }
  if (!(ref_total > 0.0))
    fail(ErrKind::evaluation, "occupation_histogram: density vanishes on the window");
  for (int b = 0; b < nb; ++b) res.reference[b] /= ref_total;

  double l1 = 0.0;
  for (int b = 0; b < nb; ++b) l1 += std::abs(res.histogram[b] - res.reference[b]);
  res.l1_distance = l1;
  return res;
}

}  // namespace divlab
