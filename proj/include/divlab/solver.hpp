#pragma once

// Sparse linear solves for the shifted operator systems arising from the
// implicit semigroup stepper and the resolvent probe.  The solver is
// BiCGStab with a Jacobi (diagonal) preconditioner on a fixed CSR pattern;
// all reductions use the blocked deterministic dot product from kernels.hpp,
// so results are bitwise independent of the OpenMP thread count.

#include <cstdint>
#include <vector>

#include "divlab/kernels.hpp"

namespace divlab {

struct SolveOptions {
  double rel_tol = 1e-12;   // convergence on ||r|| / ||b||
  std::int64_t max_iter = 20000;
  int max_restarts = 4;     // rebuilds the Krylov process on breakdown
};

struct SolveResult {
  std::int64_t iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

// Solves (values form of) m * x = b where `values` supplies the numerical
// entries for the pattern of `m`.  `x` carries the initial guess on entry.
// Throws ErrKind::solver if the iteration fails to converge.
SolveResult bicgstab(const Csr& m, const std::vector<double>& values,
                     const double* b, double* x, const SolveOptions& opts = {});

}  // namespace divlab
