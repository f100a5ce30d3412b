#include "divlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace divlab {

namespace {
constexpr double kGolden = 2.39996322972865332;  // golden angle
}

const char* finiteness_name(Finiteness f) {
  switch (f) {
    case Finiteness::finite: return "finite";
    case Finiteness::infinite: return "infinite";
    case Finiteness::unknown: return "unknown";
  }
  return "unknown";
}

std::vector<double> unit_directions(int d, int count, std::uint64_t seed, int rot_index) {
  std::vector<double> out(static_cast<size_t>(count) * d);
  // Angles are stratified with an in-stratum jitter instead of a rigid grid:
  // a regular grid of directions steps across a 2*pi-periodic coefficient in
  // near-commensurate strides at power-of-two radii, which collapses the
  // effective sample count on exactly the shells the dyadic ladders probe.
  // Jitter keeps the coverage uniform and breaks that resonance, and the
  // seeded generator keeps every draw reproducible.
  if (d == 2) {
    std::mt19937_64 rng(mix_seed(seed, 0x2000 + static_cast<std::uint64_t>(rot_index)));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * M_PI * (i + U(rng)) / count;
      out[2 * static_cast<size_t>(i)] = std::cos(th);
      out[2 * static_cast<size_t>(i) + 1] = std::sin(th);
    }
  } else if (d == 3) {
    std::mt19937_64 rng(mix_seed(seed, 0x3000 + static_cast<std::uint64_t>(rot_index)));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double off = kGolden * (rot_index % 64);
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + U(rng)) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = kGolden * i + off;
      out[3 * static_cast<size_t>(i)] = r * std::cos(th);
      out[3 * static_cast<size_t>(i) + 1] = r * std::sin(th);
      out[3 * static_cast<size_t>(i) + 2] = z;
    }
  } else {
    std::mt19937_64 rng(mix_seed(seed, 0x4000 + static_cast<std::uint64_t>(rot_index)));
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
      double n2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double v = g(rng);
        out[static_cast<size_t>(i) * d + k] = v;
        n2 += v * v;
      }
      const double inv = 1.0 / std::sqrt(std::max(n2, 1e-300));
      for (int k = 0; k < d; ++k) out[static_cast<size_t>(i) * d + k] *= inv;
    }
  }
  return out;
}

MuEstimate estimate_mu(const CoefficientField& f, const MuQuadSpec& spec) {
  const int d = f.d;
  const double omega = (d == 2)   ? 2.0 * M_PI
                       : (d == 3) ? 4.0 * M_PI
                                  : 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);

  MuEstimate est;
  double lo = 0.0;
  int shell_index = 0;
  for (double hi = 1.0; hi <= spec.r_max * 1.0000001; hi *= 2.0, ++shell_index) {
    const auto dirs = unit_directions(d, spec.directions, spec.seed, shell_index);
    const int nr = spec.radial_per_shell;
    const double dr = (hi - lo) / nr;
    double mass = 0.0;
    std::vector<double> x(d);
    for (int ir = 0; ir < nr; ++ir) {
      const double r = lo + (ir + 0.5) * dr;
      double mean = 0.0;
      for (int i = 0; i < spec.directions; ++i) {
        for (int k = 0; k < d; ++k) x[k] = r * dirs[static_cast<size_t>(i) * d + k];
        const double v = f.rho(x.data());
        if (!std::isfinite(v) || v < 0.0)
          fail(ErrKind::evaluation, "estimate_mu: rho non-finite or negative on shell");
        mean += v;
      }
      mean /= spec.directions;
      mass += omega * std::pow(r, d - 1) * mean * dr;
    }
    est.curve.radii.push_back(hi);
    est.curve.shell_mass.push_back(mass);
    const double prev = est.curve.ball_mass.empty() ? 0.0 : est.curve.ball_mass.back();
    est.curve.ball_mass.push_back(prev + mass);
    lo = hi;
  }

  const auto& sm = est.curve.shell_mass;
  const double cum = est.curve.ball_mass.back();
  const size_t n = sm.size();

  // Tail classification on the last three shell-mass ratios.
  if (n >= 3 && (sm.back() <= 1e-12 * std::max(cum, 1e-300) || sm.back() == 0.0)) {
    est.finiteness = Finiteness::finite;
    est.total = cum;
    return est;
  }
  if (n < 3) {
    est.finiteness = Finiteness::unknown;
    est.total = cum;
    return est;
  }
  bool all_decaying = true, all_fat = true;
  for (size_t k = n - std::min<size_t>(3, n - 1); k < n; ++k) {
    const double prev_mass = sm[k - 1];
    const double ratio = prev_mass > 0.0 ? sm[k] / prev_mass : kInf;
    if (!(ratio <= 0.5)) all_decaying = false;
    if (!(ratio >= 0.9)) all_fat = false;
  }
  if (all_decaying) {
    est.finiteness = Finiteness::finite;
    const double ratio = sm[n - 2] > 0.0 ? sm[n - 1] / sm[n - 2] : 0.0;
    est.total = cum + sm[n - 1] * ratio / std::max(1.0 - ratio, 0.5);
  } else if (all_fat) {
    est.finiteness = Finiteness::infinite;
    est.total = kInf;
  } else {
    est.finiteness = Finiteness::unknown;
    est.total = cum;
  }
  return est;
}

std::vector<double> dyadic_log2_slopes(const std::vector<double>& v) {
  std::vector<double> s;
  for (size_t k = 0; k + 1 < v.size(); ++k) {
    if (v[k] > 0.0 && v[k + 1] > 0.0) {
      s.push_back(std::log2(v[k + 1] / v[k]));
    } else {
      s.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return s;
}

double tail_max(const std::vector<double>& v, double fraction) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const size_t take = std::max<size_t>(1, static_cast<size_t>(std::ceil(fraction * v.size())));
  double m = -kInf;
  bool any = false;
  for (size_t k = v.size() - take; k < v.size(); ++k) {
    if (std::isnan(v[k])) continue;
    m = std::max(m, v[k]);
    any = true;
  }
  return any ? m : std::numeric_limits<double>::quiet_NaN();
}

double tail_min(const std::vector<double>& v, double fraction) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const size_t take = std::max<size_t>(1, static_cast<size_t>(std::ceil(fraction * v.size())));
  double m = kInf;
  bool any = false;
  for (size_t k = v.size() - take; k < v.size(); ++k) {
    if (std::isnan(v[k])) continue;
    m = std::min(m, v[k]);
    any = true;
  }
  return any ? m : std::numeric_limits<double>::quiet_NaN();
}

double tail_median(const std::vector<double>& v, double fraction) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const size_t take = std::max<size_t>(1, static_cast<size_t>(std::ceil(fraction * v.size())));
  std::vector<double> w;
  w.reserve(take);
  for (size_t k = v.size() - take; k < v.size(); ++k)
    if (!std::isnan(v[k])) w.push_back(v[k]);
  if (w.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(w.begin(), w.end());
  const size_t n = w.size();
  return (n % 2 == 1) ? w[n / 2] : 0.5 * (w[n / 2 - 1] + w[n / 2]);
}

}  // namespace divlab
