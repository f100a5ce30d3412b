#pragma once
// Sparse-matrix and vector kernels.
//
// Every kernel here is deterministic across OpenMP thread counts: parallel
// loops either write disjoint outputs (spmv: one thread per row) or reduce
// over a fixed block decomposition whose partial sums are combined serially
// in block order (dot/nrm2). The *_serial variants are the reference
// implementations the tests and the benchmark compare against.

#include <cstdint>
#include <vector>

namespace divlab {

struct Csr {
  std::int64_t n = 0;                 // square: n rows, n cols
  std::vector<std::int64_t> rowptr;   // size n + 1
  std::vector<std::int32_t> col;      // size nnz, sorted within each row
  std::vector<double> val;            // size nnz

  std::int64_t nnz() const { return static_cast<std::int64_t>(col.size()); }
};

// y = M x, using an explicit value array (the matrix pattern can be shared
// between several value arrays, e.g. an operator and its adjoint).
void spmv(const Csr& m, const std::vector<double>& values, const double* x, double* y);
void spmv_serial(const Csr& m, const std::vector<double>& values, const double* x, double* y);

inline void spmv(const Csr& m, const double* x, double* y) { spmv(m, m.val, x, y); }

// Deterministic reductions: fixed 4096-element blocks, per-block serial sums,
// block results combined in index order. Bitwise reproducible for any number
// of threads.
double dot(const double* a, const double* b, std::int64_t n);
double dot_serial(const double* a, const double* b, std::int64_t n);
double nrm2(const double* a, std::int64_t n);

// Serially compensated (Kahan) sum; used where a near-total cancellation is
// the quantity of interest.
double kahan_sum(const double* a, std::int64_t n);

// y = a*x + y
void axpy(double a, const double* x, double* y, std::int64_t n);

}  // namespace divlab
