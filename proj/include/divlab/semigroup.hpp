#pragma once

// Finite-volume semigroup probes.
//
// The generator is discretized on a centered box grid (Dirichlet truncation)
// and evolved with implicit Euler steps (M - dt K) f_{k+1} = M f_k, so each
// step costs one sparse solve and the scheme is unconditionally stable.  Two
// probe protocols are built on top:
//
//  * conservativeness probe: evolve f_0 = 1 on an increasing ladder of box
//    radii and watch the mass (T_t 1)(x0).  For a conservative flow the
//    deficit 1 - mass is pure boundary loss and decays quickly along the
//    ladder; a genuine mass defect stagnates instead.
//
//  * green probe: solve the resolvent system (alpha M - K) u = M g for a
//    decreasing schedule of alpha with the box radius enlarged as alpha
//    shrinks.  Growth of u(x0) along the schedule signals recurrence; a
//    saturating, positive profile signals transience.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "divlab/assemble.hpp"
#include "divlab/field.hpp"

namespace divlab {

struct MassHistory {
  double R = 0.0;
  std::vector<double> times;
  std::vector<double> mass;        // (T_t 1)(x0)
  double overshoot = 0.0;          // max over steps of (max_i f_i - 1)+
  double undershoot = 0.0;         // max over steps of (-min_i f_i)+
  double monotone_violation = 0.0; // max increase of mass between steps
  std::int64_t solver_iterations = 0;
};

// One evolution run on a fixed box.
MassHistory evolve_mass(const CoefficientField& f, double R, double h, double T,
                        double dt, const std::array<double, 3>& x0);

struct MassProbeSpec {
  std::vector<double> radii{2.0, 4.0, 6.0, 8.0};
  double h = 0.25;
  double T = 4.0;
  double dt = 0.05;
  std::array<double, 3> x0{0.0, 0.0, 0.0};
};

struct MassProbeResult {
  std::vector<MassHistory> histories;
  std::vector<double> radii;
  std::vector<double> final_mass;
  std::vector<double> deficit;  // 1 - final mass, per radius
  double overshoot = 0.0;
  double fit_log_a = 0.0;  // least-squares fit ln(deficit) ~ a + b R
  double fit_rate_b = 0.0;
  std::string verdict;  // conservative-signature | mass-defect | inconclusive
  std::string caveat;
};

MassProbeResult conservativeness_probe(const CoefficientField& f,
                                       const MassProbeSpec& spec = {});

struct GreenProbeSpec {
  std::vector<double> alphas{1.0, 0.25, 0.0625, 0.015625, 0.00390625};
  double h = 0.5;
  double g_radius = 0.6;   // source = normalized indicator of this ball
  double r_cap_3d = 32.0;  // box radius cap in dimension 3
  std::array<double, 3> x0{0.0, 0.0, 0.0};
};

struct GreenProbeResult {
  std::vector<double> alphas;
  std::vector<double> radii;   // box radius used per alpha
  std::vector<double> values;  // u_alpha(x0)
  std::vector<double> ratios;  // values[j] / values[j-1]
  std::string verdict;  // recurrent-signature | transient-signature | inconclusive
  std::string caveat;
};

GreenProbeResult green_probe(const CoefficientField& f, const GreenProbeSpec& spec = {});

}  // namespace divlab
