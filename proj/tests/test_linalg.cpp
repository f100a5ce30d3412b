#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "divlab/linalg.hpp"
#include "doctest.h"

using namespace divlab;

TEST_SUITE("linalg") {

TEST_CASE("2x2 eigenvalues in closed form") {
  // [[2,1],[1,2]] has eigenvalues {1, 3}.
  const double m[4] = {2.0, 1.0, 1.0, 2.0};
  CHECK(sym_eig_min(m, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sym_eig_max(m, 2) == doctest::Approx(3.0).epsilon(1e-14));
  double lo = 0.0, hi = 0.0;
  sym_eig_range(m, 2, &lo, &hi);
  CHECK(lo == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hi == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("3x3 tridiagonal eigenvalues") {
  // [[2,1,0],[1,2,1],[0,1,2]] has eigenvalues 2, 2 +/- sqrt(2).
  const double m[9] = {2, 1, 0, 1, 2, 1, 0, 1, 2};
  const double s2 = std::sqrt(2.0);
  CHECK(sym_eig_min(m, 3) == doctest::Approx(2.0 - s2).epsilon(1e-12));
  CHECK(sym_eig_max(m, 3) == doctest::Approx(2.0 + s2).epsilon(1e-12));
}

TEST_CASE("4x4 second-difference Toeplitz eigenvalues") {
  // tridiag(-1, 2, -1) of size 4: eigenvalues 2 - 2 cos(k pi / 5), k=1..4.
  double m[16] = {0};
  for (int i = 0; i < 4; ++i) {
    m[i * 4 + i] = 2.0;
    if (i > 0) m[i * 4 + i - 1] = -1.0;
    if (i < 3) m[i * 4 + i + 1] = -1.0;
  }
  const double pi = std::acos(-1.0);
  const double lo_ref = 2.0 - 2.0 * std::cos(pi / 5.0);
  const double hi_ref = 2.0 - 2.0 * std::cos(4.0 * pi / 5.0);
  CHECK(sym_eig_min(m, 4) == doctest::Approx(lo_ref).epsilon(1e-10));
  CHECK(sym_eig_max(m, 4) == doctest::Approx(hi_ref).epsilon(1e-10));
}

TEST_CASE("asymmetric input is symmetrized") {
  // A + C with antisymmetric C must measure only A's spectrum.
  const double ac[4] = {2.0, 1.0 + 0.7, 1.0 - 0.7, 2.0};
  CHECK(sym_eig_min(ac, 2) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(sym_eig_max(ac, 2) == doctest::Approx(3.0).epsilon(1e-13));

  // A purely antisymmetric matrix has vanishing symmetric part.
  const double c[4] = {0.0, 0.9, -0.9, 0.0};
  CHECK(sym_eig_min(c, 2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(sym_eig_max(c, 2) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("sup_abs finds the largest entry in magnitude") {
  const double m[9] = {1, -7, 2, 0.5, 3, -2, 6.5, 0, -1};
  CHECK(sup_abs(m, 3) == 7.0);
}

TEST_CASE("cholesky factors an SPD matrix and rejects a non-SPD one") {
  double m[4] = {4.0, 2.0, 2.0, 5.0};
  REQUIRE(cholesky(m, 2));
  // L = [[2,0],[1,2]]
  CHECK(m[0] == doctest::Approx(2.0));
  CHECK(m[2] == doctest::Approx(1.0));
  CHECK(m[3] == doctest::Approx(2.0));

  double bad[4] = {1.0, 2.0, 2.0, 1.0};  // eigenvalues {3, -1}
  CHECK_FALSE(cholesky(bad, 2));
}

TEST_CASE("cholesky reconstructs the input: L L^T = M") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> g(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + (trial % 2);
    double b[9], m[9], l[9];
    for (int i = 0; i < d * d; ++i) b[i] = g(rng);
    // M = B B^T + d * I is SPD.
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = (i == j) ? d : 0.0;
        for (int k = 0; k < d; ++k) s += b[i * d + k] * b[j * d + k];
        m[i * d + j] = s;
      }
    std::copy(m, m + d * d, l);
    REQUIRE(cholesky(l, d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (int k = 0; k <= j; ++k) s += l[i * d + k] * l[j * d + k];
        CHECK(s == doctest::Approx(m[i * d + j]).epsilon(1e-12));
      }
  }
}

TEST_CASE("matvec multiplies row-major") {
  const double a[9] = {1, 2, 3, 4, 5, 6, 7, 8, 10};
  const double x[3] = {1, -1, 2};
  double y[3];
  matvec(a, x, y, 3);
  CHECK(y[0] == 5.0);
  CHECK(y[1] == 11.0);
  CHECK(y[2] == 19.0);
}

TEST_CASE("entry_norm_bound dominates the true operator norm") {
  // ||M v|| <= d * max|m_ij| * ||v|| over random matrices and vectors.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> g(-2.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + (trial % 2);
    double m[9], x[3], y[3];
    for (int i = 0; i < d * d; ++i) m[i] = g(rng);
    for (int i = 0; i < d; ++i) x[i] = g(rng);
    matvec(m, x, y, d);
    double nx = 0.0, ny = 0.0;
    for (int i = 0; i < d; ++i) {
      nx += x[i] * x[i];
      ny += y[i] * y[i];
    }
    CHECK(std::sqrt(ny) <= entry_norm_bound(m, d) * std::sqrt(nx) + 1e-12);
  }
}

TEST_CASE("eigenvalue range brackets Rayleigh quotients") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> g(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + (trial % 2);
    double s[9];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) s[i * d + j] = s[j * d + i] = g(rng);
    double lo, hi;
    sym_eig_range(s, d, &lo, &hi);
    CHECK(lo <= hi);
    for (int k = 0; k < 20; ++k) {
      double x[3], y[3], q = 0.0, nx = 0.0;
      for (int i = 0; i < d; ++i) x[i] = g(rng);
      matvec(s, x, y, d);
      for (int i = 0; i < d; ++i) {
        q += x[i] * y[i];
        nx += x[i] * x[i];
      }
      if (nx < 1e-12) continue;
      const double rayleigh = q / nx;
      CHECK(rayleigh >= lo - 1e-10);
      CHECK(rayleigh <= hi + 1e-10);
    }
  }
}

}  // TEST_SUITE
