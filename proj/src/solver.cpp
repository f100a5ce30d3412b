#include "divlab/solver.hpp"

#include <cmath>
#include <cstring>

#include "divlab/common.hpp"

namespace divlab {

namespace {

void extract_inverse_diagonal(const Csr& m, const std::vector<double>& values,
                              std::vector<double>& dinv) {
  const std::int64_t n = m.n;
  dinv.assign(n, 1.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t a = m.rowptr[i]; a < m.rowptr[i + 1]; ++a) {
      if (m.col[a] == i) {
        const double dv = values[a];
        if (dv != 0.0 && std::isfinite(dv)) dinv[i] = 1.0 / dv;
        break;
      }
    }
  }
}

void hadamard(const std::vector<double>& a, const double* x, double* y, std::int64_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] = a[i] * x[i];
}

}  // namespace

SolveResult bicgstab(const Csr& m, const std::vector<double>& values,
                     const double* b, double* x, const SolveOptions& opts) {
  const std::int64_t n = m.n;
  SolveResult res;

  const double bnorm = nrm2(b, n);
  if (bnorm == 0.0) {
    std::memset(x, 0, static_cast<size_t>(n) * sizeof(double));
    res.converged = true;
    return res;
  }

  std::vector<double> dinv;
  extract_inverse_diagonal(m, values, dinv);

  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), phat(n), shat(n), t(n), tmp(n);

  auto recompute_residual = [&]() {
    spmv(m, values, x, tmp.data());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) r[i] = b[i] - tmp[i];
    rhat = r;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
  };

  recompute_residual();
  double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
  int restarts = 0;
  double relres = nrm2(r.data(), n) / bnorm;

  for (std::int64_t it = 1; it <= opts.max_iter; ++it) {
    res.iterations = it;
    const double rho = dot(rhat.data(), r.data(), n);
    if (rho == 0.0 || !std::isfinite(rho)) {
      if (++restarts > opts.max_restarts) break;
      recompute_residual();
      rho_prev = alpha = omega = 1.0;
      continue;
    }
    const double beta = (rho / rho_prev) * (alpha / omega);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    hadamard(dinv, p.data(), phat.data(), n);
    spmv(m, values, phat.data(), v.data());
    const double rv = dot(rhat.data(), v.data(), n);
    if (rv == 0.0 || !std::isfinite(rv)) {
      if (++restarts > opts.max_restarts) break;
      recompute_residual();
      rho_prev = alpha = omega = 1.0;
      continue;
    }
    alpha = rho / rv;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) r[i] -= alpha * v[i];  // r is now "s"
    double snorm = nrm2(r.data(), n);
    if (snorm / bnorm <= opts.rel_tol) {
      axpy(alpha, phat.data(), x, n);
      relres = snorm / bnorm;
      res.converged = true;
      break;
    }
    hadamard(dinv, r.data(), shat.data(), n);
    spmv(m, values, shat.data(), t.data());
    const double tt = dot(t.data(), t.data(), n);
    const double ts = dot(t.data(), r.data(), n);
    omega = (tt != 0.0 && std::isfinite(tt)) ? ts / tt : 0.0;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      x[i] += alpha * phat[i] + omega * shat[i];
      r[i] -= omega * t[i];
    }
    relres = nrm2(r.data(), n) / bnorm;
    if (!std::isfinite(relres)) {
      if (++restarts > opts.max_restarts) break;
      recompute_residual();
      rho_prev = alpha = omega = 1.0;
      relres = nrm2(r.data(), n) / bnorm;
      continue;
    }
    if (relres <= opts.rel_tol) {
      res.converged = true;
      break;
    }
    if (omega == 0.0) {
      if (++restarts > opts.max_restarts) break;
      recompute_residual();
      rho_prev = alpha = omega = 1.0;
      continue;
    }
    rho_prev = rho;
  }

  res.rel_residual = relres;
  if (!res.converged)
    fail(ErrKind::solver, "bicgstab: no convergence after " + fmt_i(res.iterations) +
                              " iterations (relative residual " + fmt_g(relres) + ")");
  return res;
}

}  // namespace divlab
