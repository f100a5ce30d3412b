#pragma once
// Dense point-local linear algebra on small d x d matrices (row-major).
// Closed forms for d = 2, 3; a cyclic Jacobi sweep covers larger d.

#include <vector>

namespace divlab {

// Smallest / largest eigenvalue of a symmetric matrix. The input is
// symmetrized internally ((S + S^T)/2) so callers may pass A + C with C
// anti-symmetric and still measure the symmetric part.
double sym_eig_min(const double* m, int d);
double sym_eig_max(const double* m, int d);

// Both extreme eigenvalues in one call (cheaper for d > 3).
void sym_eig_range(const double* m, int d, double* lo, double* hi);

// max_ij |m_ij|
double sup_abs(const double* m, int d);

// In-place lower Cholesky of an SPD matrix; returns false when a pivot is
// not strictly positive (matrix not SPD to working precision).
bool cholesky(double* m, int d);

// y = m x for a row-major d x d matrix.
void matvec(const double* m, const double* x, double* y, int d);

// Operator-norm bound used by taming and step-size heuristics:
// ||M v|| <= d * max|m_ij| * ||v||.
inline double entry_norm_bound(const double* m, int d) {
  return d * sup_abs(m, d);
}

}  // namespace divlab
