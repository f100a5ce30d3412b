#pragma once
// Coefficient fields: the data object (rho, A, C, Bbar) every other module
// consumes, plus the point-local derived quantities.
//
// Conventions, fixed once here:
//   * matrices are row-major d x d arrays of double;
//   * the row divergence of a matrix field M is (div M)_i = sum_j d_j m_ij;
//   * the drift associated with (rho, A, C) is
//         beta_i = 1/2 (div (A + C^T))_i + 1/2 ((A + C^T) grad log rho)_i,
//     and the full first-order coefficient of the generator is beta + Bbar;
//   * mu is the measure rho dx.
//
// Exact products: fields whose rho and A/C overflow or underflow separately
// (e.g. rho = e^{-|x|^2}, A = e^{+|x|^2} id) carry closures for the products
// rho*A and rho*C; all mu-weighted consumers (assembly, ellipticity bounds of
// rho*A) use those when present instead of multiplying the factors.
//
// Derivatives: analytic closures when present, otherwise central differences
// with step h_fd = fd_scale * max(1, |x|). Finite-difference samples closer
// than h_fd to a declared singular set are flagged (the boolean return),
// never silently evaluated; analytic closures are flagged only exactly on
// the singular set.

#include <functional>
#include <string>
#include <vector>

#include "divlab/common.hpp"

namespace divlab {

using ScalarFn = std::function<double(const double*)>;
using VectorFn = std::function<void(const double*, double*)>;  // fills d
using MatrixFn = std::function<void(const double*, double*)>;  // fills d*d row-major

enum class MatPart { A, C, ApC, ApCT };

struct CoefficientField {
  int d = 2;
  std::string name;

  ScalarFn rho;   // required, > 0
  MatrixFn A;     // required, symmetric, locally uniformly elliptic
  MatrixFn C;     // optional: null means identically zero (anti-symmetric)
  VectorFn Bbar;  // optional: null means identically zero

  // Optional analytic derivative closures.
  VectorFn grad_log_rho;
  VectorFn div_rows_A;  // (div A)_i = sum_j d_j a_ij
  VectorFn div_rows_C;

  // Optional exact-product closures (overflow-safe rho*A, rho*C).
  MatrixFn rho_A;
  MatrixFn rho_C;

  // Distance to the declared singular set (null: none). Zero distance marks
  // a point where coefficient derivatives are undefined. singular_points
  // lists representative members so the witness hunts know where to look.
  ScalarFn singular_distance;
  std::vector<std::vector<double>> singular_points;
  double fd_scale = 1e-5;

  // Unit directions along which the coefficients carry tube-like structure
  // (chains of bumps and similar). Shell samplers add a transverse fan of
  // points around each ray so that per-shell extrema do not depend on an
  // isotropic direction draw happening to hit a thin tube; the extra points
  // can only tighten the sampled bounds, never relax them.
  std::vector<std::vector<double>> structure_rays;

  // Structural metadata used by assembly and the comparison criteria.
  bool a_diagonal = false;       // A(x) diagonal for all x (stencil shortcut)
  bool a_identity = false;       // A = id
  bool mu_lebesgue = false;      // rho = 1
  bool has_factorization = false;  // rho_A/rho_C declared as the bounded
                                   // elliptic factorization of the field

  bool has_C() const { return static_cast<bool>(C); }
  bool has_B() const { return static_cast<bool>(Bbar); }
  bool has_products() const { return static_cast<bool>(rho_A); }
};

// --- point evaluation helpers -----------------------------------------------

inline double fd_step(const CoefficientField& f, const double* x) {
  return f.fd_scale * std::max(1.0, norm2(x, f.d));
}

void eval_A(const CoefficientField& f, const double* x, double* out);
void eval_C(const CoefficientField& f, const double* x, double* out);   // zero-fills if absent
void eval_B(const CoefficientField& f, const double* x, double* out);   // zero-fills if absent
void eval_rho_A(const CoefficientField& f, const double* x, double* out);
void eval_rho_C(const CoefficientField& f, const double* x, double* out);

// --- derived quantities ------------------------------------------------------

// Smallest eigenvalue of A(x). Throws ErrKind::evaluation on non-finite
// entries (the strict API); try_phi_A reports +-inf/NaN trouble by returning
// false instead, which the shell samplers use to fold overflow into verdicts.
double phi_A(const CoefficientField& f, const double* x);
bool try_phi_A(const CoefficientField& f, const double* x, double* out);

double sup_norm_A(const CoefficientField& f, const double* x);
double sup_norm_C(const CoefficientField& f, const double* x);
double norm_B(const CoefficientField& f, const double* x);

// Row divergence of the selected part at x. Returns false when the sample is
// flagged by the singular-set rule; out is untouched in that case.
bool row_divergence(const CoefficientField& f, MatPart part, const double* x, double* out);

// grad log rho (analytic closure or central differences on log rho).
bool grad_log_rho(const CoefficientField& f, const double* x, double* out);

// beta_i = 1/2 (div (A + C^T))_i + 1/2 ((A + C^T) grad log rho)_i.
// The two halves are evaluated so that fields with analytic closures whose
// drift vanishes identically cancel exactly in floating point.
bool beta_drift(const CoefficientField& f, const double* x, double* out);

// --- weak divergence-free residual ------------------------------------------

struct TestFunction {
  std::string name;
  ScalarFn value;
  VectorFn gradient;
};

struct QuadratureSpec {
  double half_width = 8.0;  // integrate over [-L, L]^d
  int points_per_axis = 64; // tensor midpoint rule
};

// integral of <Bbar, grad f> rho dx over the quadrature box.
double divergence_free_residual(const CoefficientField& f, const TestFunction& test,
                                const QuadratureSpec& quad);

// Battery of compactly supported test functions scaled to the quadrature box.
std::vector<TestFunction> test_function_battery(int d, double support_radius);

// --- structural validation ----------------------------------------------------

struct StructureSummary {
  std::int64_t samples = 0;
  double symmetry_max_dev = 0.0;      // max |a_ij - a_ji|
  double antisymmetry_max_dev = 0.0;  // max |c_ij + c_ji|
  double rho_min = kInf;
  double phi_a_min = kInf;
  bool finite = true;
  std::string violation;  // empty when everything holds
  bool ok() const { return violation.empty(); }
};

// Samples the structural invariants (rho > 0, A symmetric elliptic, C
// anti-symmetric, finite values) at deterministic points of B_radius.
StructureSummary structural_check(const CoefficientField& f, double radius,
                                  std::int64_t samples, std::uint64_t seed);

}  // namespace divlab
