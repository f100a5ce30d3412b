#include "divlab/kernels.hpp"

#include <cmath>

#include "divlab/common.hpp"

namespace divlab {

namespace {
constexpr std::int64_t kBlock = 4096;
}

void spmv_serial(const Csr& m, const std::vector<double>& values, const double* x, double* y) {
  for (std::int64_t i = 0; i < m.n; ++i) {
    double s = 0.0;
    const std::int64_t e = m.rowptr[i + 1];
    for (std::int64_t k = m.rowptr[i]; k < e; ++k) s += values[k] * x[m.col[k]];
    y[i] = s;
  }
}

void spmv(const Csr& m, const std::vector<double>& values, const double* x, double* y) {
  const std::int64_t n = m.n;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    const std::int64_t e = m.rowptr[i + 1];
    for (std::int64_t k = m.rowptr[i]; k < e; ++k) s += values[k] * x[m.col[k]];
    y[i] = s;
  }
}

double dot_serial(const double* a, const double* b, std::int64_t n) {
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot(const double* a, const double* b, std::int64_t n) {
  const std::int64_t nb = (n + kBlock - 1) / kBlock;
  if (nb <= 1) return dot_serial(a, b, n);
  std::vector<double> part(static_cast<size_t>(nb));
#pragma omp parallel for schedule(static)
  for (std::int64_t bi = 0; bi < nb; ++bi) {
    const std::int64_t lo = bi * kBlock;
    const std::int64_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += a[i] * b[i];
    part[bi] = s;
  }
  double s = 0.0;
  for (std::int64_t bi = 0; bi < nb; ++bi) s += part[bi];  // fixed order
  return s;
}

double nrm2(const double* a, std::int64_t n) { return std::sqrt(dot(a, a, n)); }

double kahan_sum(const double* a, std::int64_t n) {
  double s = 0.0, c = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double y = a[i] - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

void axpy(double a, const double* x, double* y, std::int64_t n) {
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace divlab
