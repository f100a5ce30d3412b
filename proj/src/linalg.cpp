#include "divlab/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "divlab/common.hpp"

namespace divlab {

namespace {

// Eigenvalues of the symmetric part of a 2x2 matrix.
inline void eig2(const double* m, double* lo, double* hi) {
  const double a = m[0], d = m[3];
  const double b = 0.5 * (m[1] + m[2]);
  const double tr = a + d;
  const double disc = std::sqrt(sqr(0.5 * (a - d)) + b * b);
  *lo = 0.5 * tr - disc;
  *hi = 0.5 * tr + disc;
}

// Eigenvalue range of the symmetric part of a 3x3 matrix via the standard
// trigonometric solution of the characteristic cubic.
inline void eig3(const double* m, double* lo, double* hi) {
  const double a00 = m[0], a11 = m[4], a22 = m[8];
  const double a01 = 0.5 * (m[1] + m[3]);
  const double a02 = 0.5 * (m[2] + m[6]);
  const double a12 = 0.5 * (m[5] + m[7]);

  const double q = (a00 + a11 + a22) / 3.0;
  const double b00 = a00 - q, b11 = a11 - q, b22 = a22 - q;
  const double p2 = (b00 * b00 + b11 * b11 + b22 * b22 +
                     2.0 * (a01 * a01 + a02 * a02 + a12 * a12)) / 6.0;
  const double p = std::sqrt(std::max(p2, 0.0));
  if (p < 1e-300) {  // (numerically) a multiple of the identity
    *lo = q;
    *hi = q;
    return;
  }
  // det(B/p) for the shifted, scaled matrix B = A - q I.
  const double ip = 1.0 / p;
  const double c00 = b00 * ip, c11 = b11 * ip, c22 = b22 * ip;
  const double c01 = a01 * ip, c02 = a02 * ip, c12 = a12 * ip;
  double det = c00 * (c11 * c22 - c12 * c12) - c01 * (c01 * c22 - c12 * c02) +
               c02 * (c01 * c12 - c11 * c02);
  det = std::clamp(0.5 * det, -1.0, 1.0);
  const double phi = std::acos(det) / 3.0;
  const double e_hi = q + 2.0 * p * std::cos(phi);
  const double e_lo = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  *lo = e_lo;
  *hi = e_hi;
}

// Cyclic Jacobi for d > 3. Point-local matrices are tiny, so a fixed sweep
// count is plenty.
void eig_jacobi(const double* m, int d, double* lo, double* hi) {
  std::vector<double> a(static_cast<size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      a[static_cast<size_t>(i) * d + j] =
          0.5 * (m[static_cast<size_t>(i) * d + j] + m[static_cast<size_t>(j) * d + i]);
  auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * d + j]; };
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off += sqr(at(i, j));
    if (off < 1e-28) break;
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  double mn = at(0, 0), mx = at(0, 0);
  for (int i = 1; i < d; ++i) {
    mn = std::min(mn, at(i, i));
    mx = std::max(mx, at(i, i));
  }
  *lo = mn;
  *hi = mx;
}

}  // namespace

void sym_eig_range(const double* m, int d, double* lo, double* hi) {
  if (d == 1) {
    *lo = *hi = m[0];
  } else if (d == 2) {
    eig2(m, lo, hi);
  } else if (d == 3) {
    eig3(m, lo, hi);
  } else {
    eig_jacobi(m, d, lo, hi);
  }
}

double sym_eig_min(const double* m, int d) {
  double lo, hi;
  sym_eig_range(m, d, &lo, &hi);
  return lo;
}

double sym_eig_max(const double* m, int d) {
  double lo, hi;
  sym_eig_range(m, d, &lo, &hi);
  return hi;
}

double sup_abs(const double* m, int d) {
  double s = 0.0;
  const int n = d * d;
  for (int i = 0; i < n; ++i) s = std::max(s, std::abs(m[i]));
  return s;
}

bool cholesky(double* m, int d) {
  for (int j = 0; j < d; ++j) {
    double diag = m[j * d + j];
    for (int k = 0; k < j; ++k) diag -= sqr(m[j * d + k]);
    if (!(diag > 0.0) || !std::isfinite(diag)) return false;
    const double l = std::sqrt(diag);
    m[j * d + j] = l;
    for (int i = j + 1; i < d; ++i) {
      double v = m[i * d + j];
      for (int k = 0; k < j; ++k) v -= m[i * d + k] * m[j * d + k];
      m[i * d + j] = v / l;
    }
    for (int k = j + 1; k < d; ++k) m[j * d + k] = 0.0;  // zero upper triangle
  }
  return true;
}

void matvec(const double* m, const double* x, double* y, int d) {
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += m[static_cast<size_t>(i) * d + j] * x[j];
    y[i] = s;
  }
}

}  // namespace divlab
