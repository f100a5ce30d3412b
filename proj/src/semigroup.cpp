#include "divlab/semigroup.hpp"

#include <algorithm>
#include <cmath>

#include "divlab/solver.hpp"

namespace divlab {

namespace {

// Values for the pattern of op.K holding kscale * K + mscale * M.
std::vector<double> shifted_values(const DiscreteOperator& op, double mscale,
                                   double kscale) {
  std::vector<double> vals(op.K.nnz());
  const std::int64_t n = op.K.n;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t a = op.K.rowptr[i]; a < op.K.rowptr[i + 1]; ++a) {
      double v = kscale * op.K.val[a];
      if (op.K.col[a] == i) v += mscale * op.mu[i];
      vals[a] = v;
    }
  }
  return vals;
}

}  // namespace

MassHistory evolve_mass(const CoefficientField& f, double R, double h, double T,
                        double dt, const std::array<double, 3>& x0) {
  if (!(T > 0.0) || !(dt > 0.0) || dt > T)
    fail(ErrKind::schema, "evolve_mass: need 0 < dt <= T");
  const Grid g = make_grid(f.d, R, h);
  const DiscreteOperator op = assemble(f, g);
  const std::int64_t node = op.node_at(x0.data());
  if (node < 0)
    fail(ErrKind::schema, "evolve_mass: observation point lies outside the grid interior");

  const std::vector<double> step_vals = shifted_values(op, 1.0, -dt);
  const std::int64_t n = g.n;
  std::vector<double> fcur(n, 1.0), rhs(n), fnext(n);

  MassHistory hist;
  hist.R = R;
  hist.times.push_back(0.0);
  hist.mass.push_back(1.0);

  SolveOptions sopt;
  sopt.rel_tol = 1e-12;
  const std::int64_t steps = static_cast<std::int64_t>(std::llround(T / dt));
  double prev_mass = 1.0;
  for (std::int64_t k = 1; k <= steps; ++k) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) rhs[i] = op.mu[i] * fcur[i];
    fnext = fcur;  // warm start
    const SolveResult sr = bicgstab(op.K, step_vals, rhs.data(), fnext.data(), sopt);
    hist.solver_iterations += sr.iterations;
    fcur.swap(fnext);

    double hi = fcur[0], lo = fcur[0];
    for (std::int64_t i = 1; i < n; ++i) {
      hi = std::max(hi, fcur[i]);
      lo = std::min(lo, fcur[i]);
    }
    hist.overshoot = std::max(hist.overshoot, hi - 1.0);
    hist.undershoot = std::max(hist.undershoot, -lo);
    const double mass = fcur[node];
    hist.monotone_violation = std::max(hist.monotone_violation, mass - prev_mass);
    prev_mass = mass;
    hist.times.push_back(k * dt);
    hist.mass.push_back(mass);
  }
  hist.overshoot = std::max(hist.overshoot, 0.0);
  hist.undershoot = std::max(hist.undershoot, 0.0);
  hist.monotone_violation = std::max(hist.monotone_violation, 0.0);
  return hist;
}

MassProbeResult conservativeness_probe(const CoefficientField& f,
                                       const MassProbeSpec& spec) {
  if (spec.radii.size() < 2)
    fail(ErrKind::schema, "conservativeness_probe: need at least two box radii");
  MassProbeResult out;
  for (double R : spec.radii) {
    MassHistory h = evolve_mass(f, R, spec.h, spec.T, spec.dt, spec.x0);
    out.radii.push_back(R);
    out.final_mass.push_back(h.mass.back());
    out.deficit.push_back(1.0 - h.mass.back());
    out.overshoot = std::max(out.overshoot, std::max(h.overshoot, h.undershoot));
    if (h.monotone_violation > 1e-8)
      out.caveat = "mass history not monotone within tolerance";
    out.histories.push_back(std::move(h));
  }

  // Least-squares fit ln(deficit) ~ a + b R over usable deficits.
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (size_t j = 0; j < out.radii.size(); ++j) {
      if (out.deficit[j] > 1e-16) {
        const double X = out.radii[j], Y = std::log(out.deficit[j]);
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
        ++cnt;
      }
    }
    if (cnt >= 2) {
      const double den = cnt * sxx - sx * sx;
      if (den > 0) {
        out.fit_rate_b = (cnt * sxy - sx * sy) / den;
        out.fit_log_a = (sy - out.fit_rate_b * sx) / cnt;
      }
    }
  }

  const size_t last = out.deficit.size() - 1;
  const double dlast = out.deficit[last];
  const double dprev = out.deficit[last - 1];
  if (!out.caveat.empty()) {
    out.verdict = "inconclusive";
    return out;
  }
  if (dlast <= 1e-6) {
    out.verdict = "conservative-signature";
    return out;
  }
  bool decaying = dlast <= 1e-3;
  for (size_t j = 1; j < out.deficit.size() && decaying; ++j) {
    if (!(out.deficit[j] <= 0.7 * out.deficit[j - 1])) decaying = false;
  }
  if (decaying) {
    out.verdict = "conservative-signature";
  } else if (dlast >= 1e-3 && dprev > 0.0 && dlast >= 0.5 * dprev) {
    out.verdict = "mass-defect";
  } else {
    out.verdict = "inconclusive";
  }
  return out;
}

GreenProbeResult green_probe(const CoefficientField& f, const GreenProbeSpec& spec) {
  if (spec.alphas.size() < 3)
    fail(ErrKind::schema, "green_probe: need at least three resolvent parameters");
  GreenProbeResult out;
  for (double a : spec.alphas)
    if (!(a > 0.0)) fail(ErrKind::schema, "green_probe: resolvent parameters must be positive");

  for (double alpha : spec.alphas) {
    double R = std::max(8.0, 4.0 / std::sqrt(alpha));
    if (f.d >= 3) R = std::min(R, spec.r_cap_3d);
    const Grid g = make_grid(f.d, R, spec.h);
    const DiscreteOperator op = assemble(f, g);
    const std::int64_t node = op.node_at(spec.x0.data());
    if (node < 0)
      fail(ErrKind::schema, "green_probe: observation point lies outside the grid interior");

    // Source: indicator of the g_radius ball, normalized to unit mu-mass.
    const std::int64_t n = g.n;
    std::vector<double> gv(n, 0.0);
    double gmass = 0.0;
    int mi[3];
    double x[3];
    for (std::int64_t i = 0; i < n; ++i) {
      g.multi(i, mi);
      g.point(mi, x);
      if (norm2(x, g.d) <= spec.g_radius) {
        gv[i] = 1.0;
        gmass += op.mu[i];
      }
    }
    if (!(gmass > 0.0))
      fail(ErrKind::evaluation, "green_probe: source ball carries no measure on this grid");
    for (std::int64_t i = 0; i < n; ++i) gv[i] /= gmass;

    std::vector<double> rhs(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) rhs[i] = op.mu[i] * gv[i];

    const std::vector<double> sys_vals = shifted_values(op, alpha, -1.0);
    std::vector<double> u(n, 0.0);
    SolveOptions sopt;
    sopt.rel_tol = 1e-10;
    bicgstab(op.K, sys_vals, rhs.data(), u.data(), sopt);

    out.alphas.push_back(alpha);
    out.radii.push_back(R);
    out.values.push_back(u[node]);
  }

  for (size_t j = 1; j < out.values.size(); ++j) {
    const double prev = out.values[j - 1];
    out.ratios.push_back(prev != 0.0 ? out.values[j] / prev : kInf);
  }

  const size_t nr = out.ratios.size();
  bool finite_vals = true, positive_vals = true, nondecr_vals = true;
  for (size_t j = 0; j < out.values.size(); ++j) {
    if (!std::isfinite(out.values[j])) finite_vals = false;
    if (!(out.values[j] > 0.0)) positive_vals = false;
    if (j > 0 && out.values[j] < out.values[j - 1] * (1.0 - 1e-9)) nondecr_vals = false;
  }
  bool ratios_decreasing = true;
  for (size_t j = 1; j < nr; ++j)
    if (out.ratios[j] > out.ratios[j - 1] + 1e-9) ratios_decreasing = false;

  if (!finite_vals) {
    out.verdict = "inconclusive";
    out.caveat = "resolvent values non-finite";
  } else if (nr >= 2 && out.ratios[nr - 1] >= 1.15 && out.ratios[nr - 2] >= 1.15) {
    out.verdict = "recurrent-signature";
  } else if (out.ratios[nr - 1] <= 1.02 && ratios_decreasing && positive_vals &&
             nondecr_vals) {
    out.verdict = "transient-signature";
  } else {
    out.verdict = "inconclusive";
  }
  return out;
}

}  // namespace divlab
