#include "divlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "divlab/linalg.hpp"

namespace divlab {

namespace {

// Central-difference row divergence: (div M)_i = sum_j d_j m_ij, evaluating
// the full matrix at x +- h e_j for each axis j.
template <typename EvalFn>
void fd_row_divergence(EvalFn&& eval, int d, const double* x, double h, double* out) {
  std::vector<double> xp(x, x + d), xm(x, x + d);
  std::vector<double> mp(static_cast<size_t>(d) * d), mm(static_cast<size_t>(d) * d);
  for (int i = 0; i < d; ++i) out[i] = 0.0;
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    eval(xp.data(), mp.data());
    eval(xm.data(), mm.data());
    for (int i = 0; i < d; ++i)
      out[i] += (mp[static_cast<size_t>(i) * d + j] - mm[static_cast<size_t>(i) * d + j]) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
}

bool fd_sample_allowed(const CoefficientField& f, const double* x, double h) {
  if (!f.singular_distance) return true;
  return f.singular_distance(x) > h;
}

bool analytic_sample_allowed(const CoefficientField& f, const double* x) {
  if (!f.singular_distance) return true;
  return f.singular_distance(x) > 0.0;
}

}  // namespace

void eval_A(const CoefficientField& f, const double* x, double* out) { f.A(x, out); }

void eval_C(const CoefficientField& f, const double* x, double* out) {
  if (f.C) {
    f.C(x, out);
  } else {
    std::fill(out, out + static_cast<size_t>(f.d) * f.d, 0.0);
  }
}

void eval_B(const CoefficientField& f, const double* x, double* out) {
  if (f.Bbar) {
    f.Bbar(x, out);
  } else {
    std::fill(out, out + f.d, 0.0);
  }
}

void eval_rho_A(const CoefficientField& f, const double* x, double* out) {
  if (f.rho_A) {
    f.rho_A(x, out);
    return;
  }
  const double r = f.rho(x);
  f.A(x, out);
  const int n = f.d * f.d;
  for (int i = 0; i < n; ++i) out[i] *= r;
}

void eval_rho_C(const CoefficientField& f, const double* x, double* out) {
  if (f.rho_C) {
    f.rho_C(x, out);
    return;
  }
  eval_C(f, x, out);
  if (!f.has_C()) return;
  const double r = f.rho(x);
  const int n = f.d * f.d;
  for (int i = 0; i < n; ++i) out[i] *= r;
}

bool try_phi_A(const CoefficientField& f, const double* x, double* out) {
  std::vector<double> a(static_cast<size_t>(f.d) * f.d);
  f.A(x, a.data());
  if (!all_finite(a.data(), f.d * f.d)) return false;
  *out = sym_eig_min(a.data(), f.d);
  return true;
}

double phi_A(const CoefficientField& f, const double* x) {
  double v = 0.0;
  if (!try_phi_A(f, x, &v))
    fail(ErrKind::evaluation, "phi_A: non-finite diffusion matrix entries at sample point");
  return v;
}

double sup_norm_A(const CoefficientField& f, const double* x) {
  std::vector<double> a(static_cast<size_t>(f.d) * f.d);
  f.A(x, a.data());
  return sup_abs(a.data(), f.d);
}

double sup_norm_C(const CoefficientField& f, const double* x) {
  if (!f.has_C()) return 0.0;
  std::vector<double> c(static_cast<size_t>(f.d) * f.d);
  f.C(x, c.data());
  return sup_abs(c.data(), f.d);
}

double norm_B(const CoefficientField& f, const double* x) {
  if (!f.has_B()) return 0.0;
  std::vector<double> b(f.d);
  f.Bbar(x, b.data());
  return norm2(b.data(), f.d);
}

bool row_divergence(const CoefficientField& f, MatPart part, const double* x, double* out) {
  const int d = f.d;
  std::vector<double> da(d, 0.0), dc(d, 0.0);

  const bool need_a = (part == MatPart::A || part == MatPart::ApC || part == MatPart::ApCT);
  const bool need_c =
      f.has_C() && (part == MatPart::C || part == MatPart::ApC || part == MatPart::ApCT);

  if (need_a) {
    if (f.div_rows_A) {
      if (!analytic_sample_allowed(f, x)) return false;
      f.div_rows_A(x, da.data());
    } else {
      const double h = fd_step(f, x);
      if (!fd_sample_allowed(f, x, h)) return false;
      fd_row_divergence([&](const double* p, double* m) { f.A(p, m); }, d, x, h, da.data());
    }
  }
  if (need_c) {
    if (f.div_rows_C) {
      if (!analytic_sample_allowed(f, x)) return false;
      f.div_rows_C(x, dc.data());
    } else {
      const double h = fd_step(f, x);
      if (!fd_sample_allowed(f, x, h)) return false;
      fd_row_divergence([&](const double* p, double* m) { f.C(p, m); }, d, x, h, dc.data());
    }
  }

  // C is anti-symmetric, so div(C^T) = -div(C) row-wise.
  switch (part) {
    case MatPart::A:
      for (int i = 0; i < d; ++i) out[i] = da[i];
      break;
    case MatPart::C:
      for (int i = 0; i < d; ++i) out[i] = dc[i];
      break;
    case MatPart::ApC:
      for (int i = 0; i < d; ++i) out[i] = da[i] + dc[i];
      break;
    case MatPart::ApCT:
      for (int i = 0; i < d; ++i) out[i] = da[i] - dc[i];
      break;
  }
  return true;
}

bool grad_log_rho(const CoefficientField& f, const double* x, double* out) {
  const int d = f.d;
  if (f.grad_log_rho) {
    if (!analytic_sample_allowed(f, x)) return false;
    f.grad_log_rho(x, out);
    return true;
  }
  const double h = fd_step(f, x);
  if (!fd_sample_allowed(f, x, h)) return false;
  std::vector<double> xp(x, x + d), xm(x, x + d);
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    const double rp = f.rho(xp.data());
    const double rm = f.rho(xm.data());
    if (!(rp > 0.0) || !(rm > 0.0))
      fail(ErrKind::evaluation, "grad_log_rho: rho not strictly positive near sample point");
    out[j] = (std::log(rp) - std::log(rm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return true;
}

bool beta_drift(const CoefficientField& f, const double* x, double* out) {
  const int d = f.d;
  std::vector<double> rd(d), glr(d), s(static_cast<size_t>(d) * d);
  if (!row_divergence(f, MatPart::ApCT, x, rd.data())) return false;
  if (!grad_log_rho(f, x, glr.data())) return false;

  f.A(x, s.data());
  if (f.has_C()) {
    std::vector<double> c(static_cast<size_t>(d) * d);
    f.C(x, c.data());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        s[static_cast<size_t>(i) * d + j] += c[static_cast<size_t>(j) * d + i];
  }

  // out = (rd + S glr) / 2, accumulated term-by-term: when an analytic
  // div-rows closure is the exact negative of S grad log rho (gradient-form
  // fields), the sum cancels exactly instead of leaving an O(eps * scale)
  // residue.
  for (int i = 0; i < d; ++i) {
    double mv = 0.0;
    for (int j = 0; j < d; ++j) mv += s[static_cast<size_t>(i) * d + j] * glr[j];
    out[i] = 0.5 * (rd[i] + mv);
  }
  return true;
}

double divergence_free_residual(const CoefficientField& f, const TestFunction& test,
                                const QuadratureSpec& quad) {
  if (!f.has_B()) return 0.0;
  const int d = f.d;
  const int n = quad.points_per_axis;
  if (n < 2 || quad.half_width <= 0.0)
    fail(ErrKind::schema, "divergence_free_residual: invalid quadrature spec");
  const double L = quad.half_width;
  const double h = 2.0 * L / n;
  const double cell = std::pow(h, d);

  std::int64_t total = 1;
  for (int k = 0; k < d; ++k) total *= n;

  double acc = 0.0, comp = 0.0;  // Kahan accumulation across cells
  std::vector<double> x(d), b(d), g(d);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t t = idx;
    for (int k = 0; k < d; ++k) {
      const int ik = static_cast<int>(t % n);
      t /= n;
      x[k] = -L + (ik + 0.5) * h;
    }
    const double r = f.rho(x.data());
    if (!(r >= 0.0) || !std::isfinite(r))
      fail(ErrKind::evaluation, "divergence_free_residual: rho non-finite or negative");
    f.Bbar(x.data(), b.data());
    test.gradient(x.data(), g.data());
    double v = 0.0;
    for (int k = 0; k < d; ++k) v += b[k] * g[k];
    const double y = v * r * cell - comp;
    const double tt = acc + y;
    comp = (tt - acc) - y;
    acc = tt;
  }
  return acc;
}

std::vector<TestFunction> test_function_battery(int d, double support_radius) {
  std::vector<TestFunction> out;
  const double R = support_radius;

  // Smooth radial bump (1 - |x|^2/R^2)^3_+ and coordinate-modulated variants:
  // x_k * bump, sin(x_k) * bump. All are C^1 with compact support in B_R.
  auto bump = [R, d](const double* x) {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) r2 += x[k] * x[k];
    const double u = 1.0 - r2 / (R * R);
    return u > 0.0 ? u * u * u : 0.0;
  };
  auto dbump = [R, d](const double* x, int k) {
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) r2 += x[j] * x[j];
    const double u = 1.0 - r2 / (R * R);
    if (u <= 0.0) return 0.0;
    return 3.0 * u * u * (-2.0 * x[k] / (R * R));
  };

  out.push_back({"radial_bump", [bump](const double* x) { return bump(x); },
                 [dbump, d](const double* x, double* g) {
                   for (int k = 0; k < d; ++k) g[k] = dbump(x, k);
                 }});

  for (int axis = 0; axis < d; ++axis) {
    out.push_back({"coord" + std::to_string(axis) + "_bump",
                   [bump, axis](const double* x) { return x[axis] * bump(x); },
                   [bump, dbump, axis, d](const double* x, double* g) {
                     const double b = bump(x);
                     for (int k = 0; k < d; ++k) g[k] = x[axis] * dbump(x, k);
                     g[axis] += b;
                   }});
    out.push_back({"sin" + std::to_string(axis) + "_bump",
                   [bump, axis](const double* x) { return std::sin(x[axis]) * bump(x); },
                   [bump, dbump, axis, d](const double* x, double* g) {
                     const double b = bump(x);
                     const double s = std::sin(x[axis]), c = std::cos(x[axis]);
                     for (int k = 0; k < d; ++k) g[k] = s * dbump(x, k);
                     g[axis] += c * b;
                   }});
  }
  return out;
}

StructureSummary structural_check(const CoefficientField& f, double radius,
                                  std::int64_t samples, std::uint64_t seed) {
  StructureSummary s;
  const int d = f.d;
  if (d < 2) {
    s.violation = "dimension must be at least 2";
    return s;
  }
  std::mt19937_64 rng(mix_seed(seed, 0xabcd));
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<double> x(d), a(static_cast<size_t>(d) * d), c(static_cast<size_t>(d) * d);

  for (std::int64_t it = 0; it < samples; ++it) {
    for (int k = 0; k < d; ++k) x[k] = u(rng);
    if (norm2(x.data(), d) > radius) continue;
    if (f.singular_distance && f.singular_distance(x.data()) <= 0.0) continue;
    ++s.samples;

    const double r = f.rho(x.data());
    if (!std::isfinite(r)) s.finite = false;
    if (!(r > 0.0)) {
      s.violation = "rho not strictly positive at sampled point";
      return s;
    }
    s.rho_min = std::min(s.rho_min, r);

    f.A(x.data(), a.data());
    if (!all_finite(a.data(), d * d)) {
      s.finite = false;
      s.violation = "diffusion matrix non-finite at sampled point";
      return s;
    }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        s.symmetry_max_dev =
            std::max(s.symmetry_max_dev,
                     std::abs(a[static_cast<size_t>(i) * d + j] - a[static_cast<size_t>(j) * d + i]));
    const double phi = sym_eig_min(a.data(), d);
    s.phi_a_min = std::min(s.phi_a_min, phi);
    if (!(phi > 0.0)) {
      s.violation = "diffusion matrix not strictly elliptic at sampled point";
      return s;
    }

    if (f.has_C()) {
      f.C(x.data(), c.data());
      if (!all_finite(c.data(), d * d)) {
        s.finite = false;
        s.violation = "anti-symmetric part non-finite at sampled point";
        return s;
      }
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
          s.antisymmetry_max_dev =
              std::max(s.antisymmetry_max_dev,
                       std::abs(c[static_cast<size_t>(i) * d + j] + c[static_cast<size_t>(j) * d + i]));
    }
  }
  if (s.symmetry_max_dev > 1e-12) s.violation = "diffusion matrix not symmetric";
  if (s.antisymmetry_max_dev > 1e-12) s.violation = "C part not anti-symmetric";
  return s;
}

}  // namespace divlab
