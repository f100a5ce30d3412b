#pragma once
// Finite-volume discretization of the mu-weighted generator on a Dirichlet
// grid. The assembled matrix is K = M L_h with M = diag(mu_i); storing the
// weighted form makes the structural identities exact:
//
//   * diagonal diffusion: two-point face fluxes with arithmetic-mean face
//     weights mu-a_kk — exactly symmetric;
//   * off-diagonal / anti-symmetric part: node-centered corner stencil
//     (h^d/2) sum_{k != l} D^c_k ( rho m_kl D^c_l f ) with central
//     differences D^c — exactly symmetric for the A part and exactly
//     anti-symmetric for the C part, including the boundary truncation;
//   * drift: central differences weighted by mu_i b_k(x_i); its duality
//     defect against the reversed-sign drift vanishes to O(h) at worst and
//     O(h^2) for divergence-free mu Bbar.
//
// The products rho*A and rho*C enter through the field's exact-product
// closures whenever declared, so separately overflowing factors never meet.

#include "divlab/field.hpp"
#include "divlab/grid.hpp"
#include "divlab/kernels.hpp"

namespace divlab {

struct DiscreteOperator {
  Grid grid;
  std::vector<double> mu;  // mu_i = rho(x_i) h^d, interior nodes
  Csr K;                   // mu-weighted generator
  std::vector<double> valp;  // dual-operator values on the shared pattern
  bool has_dual = false;

  std::int64_t node_at(const double* x) const;  // nearest interior node, -1 if outside
};

struct AssembleOptions {
  bool build_dual = false;  // also build K' (C -> -C, Bbar -> -Bbar)
};

// Single-pass deterministic assembly (two sweeps over nodes: count, fill).
DiscreteOperator assemble(const CoefficientField& f, const Grid& g,
                          const AssembleOptions& opts = {});

// out = L_h f = M^{-1} K f (mu must be bounded away from zero for this to be
// meaningful; probes work with K directly).
void apply_generator(const DiscreteOperator& op, const double* fvec, double* out);

// Kahan-compensated sum of (K f)_i, i.e. of mu_i (L_h f)_i. Requires f to
// vanish on every node within two grid steps of the boundary (precondition
// error otherwise): the identity being tested is interior conservation.
double invariance_residual(const DiscreteOperator& op, const std::vector<double>& fvec);

// max_t |<K f_t, g_t> - <f_t, K' g_t>| over random mu-normalized pairs.
double duality_residual(const DiscreteOperator& op, int trials, std::uint64_t seed);

}  // namespace divlab
