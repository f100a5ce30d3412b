#pragma once
// Deterministic sampling geometry: unit-direction sets, dyadic shell masses
// of mu = rho dx, and the finiteness estimate built on them.

#include <cstdint>
#include <vector>

#include "divlab/field.hpp"

namespace divlab {

// count unit vectors on S^{d-1}, row-major (count x d). Deterministic: evenly
// spaced on the circle (d=2), a Fibonacci lattice (d=3), seeded normalized
// Gaussians for d > 3. rot_index decorrelates direction sets across shells.
std::vector<double> unit_directions(int d, int count, std::uint64_t seed,
                                    int rot_index = 0);

enum class Finiteness { finite, infinite, unknown };

const char* finiteness_name(Finiteness f);

struct MuCurve {
  std::vector<double> radii;       // dyadic: 1, 2, 4, ..., r_max
  std::vector<double> shell_mass;  // mu(shell between consecutive radii); [0] = mu(B_1)
  std::vector<double> ball_mass;   // cumulative
};

struct MuEstimate {
  Finiteness finiteness = Finiteness::unknown;
  double total = 0.0;  // +inf when infinite; upper estimate when finite
  MuCurve curve;
};

struct MuQuadSpec {
  double r_max = 1024.0;
  int directions = 512;
  int radial_per_shell = 64;
  std::uint64_t seed = 1;
};

// Spherical-shell quadrature of mu(B_r) on dyadic radii plus the
// tail-behaviour classification (geometric decay => finite with a summed
// tail bound; non-decaying shell masses => infinite).
MuEstimate estimate_mu(const CoefficientField& f, const MuQuadSpec& spec);

// log2(v[k+1]/v[k]) for a positive sequence; non-positive entries give NaN.
std::vector<double> dyadic_log2_slopes(const std::vector<double>& v);

// Max / min over the trailing ceil(fraction * size) entries, skipping NaNs.
double tail_max(const std::vector<double>& v, double fraction);
double tail_min(const std::vector<double>& v, double fraction);

// Median over the same trailing window, skipping NaNs (NaN if none remain).
// Trend gates use the median so one equilibration transient inside the tail
// cannot masquerade as sustained growth or decay: spherical suprema of
// oscillatory coefficients genuinely wobble across the first few dyadic
// shells before settling, and only the settled trend is evidence.
double tail_median(const std::vector<double>& v, double fraction);

}  // namespace divlab
