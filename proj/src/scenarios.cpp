#include "divlab/scenarios.hpp"

#include <algorithm>
#include <cmath>

namespace divlab {

namespace {

// Shared squared-norm helper: every closure of a scenario computes r^2 through
// this one function so that products meant to cancel exactly see bitwise
// identical intermediate values.
double sq(const double* x, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += x[i] * x[i];
  return s;
}

void fill_identity(double* out, int d) {
  std::fill(out, out + static_cast<size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) out[i * d + i] = 1.0;
}

void fill_diag(double* out, int d, double v) {
  std::fill(out, out + static_cast<size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) out[i * d + i] = v;
}

// --- bump chain ---------------------------------------------------------------
// psi(x) = eta(|x|) |x|^{2/3} with eta = 1 on [0, 1/4], a cubic blend down to 0
// on [1/4, 1/2]. psi is C^1 away from the center, has compact support in the
// half-ball, and its gradient blows up like |x|^{-1/3} at the center, which is
// exactly the low-regularity feature the chain scenarios are built around.
constexpr double kBumpGamma = 2.0 / 3.0;

double bump_eta(double r) {
  if (r <= 0.25) return 1.0;
  if (r >= 0.5) return 0.0;
  const double u = 4.0 * r - 1.0;
  return 1.0 - 3.0 * u * u + 2.0 * u * u * u;
}

double bump_eta_dr(double r) {
  if (r <= 0.25 || r >= 0.5) return 0.0;
  const double u = 4.0 * r - 1.0;
  return 24.0 * u * (u - 1.0);
}

double bump_psi(double r) {
  if (r <= 0.0 || r >= 0.5) return 0.0;
  return bump_eta(r) * std::pow(r, kBumpGamma);
}

double bump_psi_dr(double r) {
  if (r <= 0.0 || r >= 0.5) return 0.0;
  return bump_eta_dr(r) * std::pow(r, kBumpGamma) +
         bump_eta(r) * kBumpGamma * std::pow(r, kBumpGamma - 1.0);
}

// Centers sit at k e_1 for integer k >= 0; supports are disjoint up to touching.
long long chain_center(const double* x) {
  long long k = std::llround(x[0]);
  return k < 0 ? 0 : k;
}

double chain_dist(const double* x, int d) {
  const long long k = chain_center(x);
  double s = (x[0] - k) * (x[0] - k);
  for (int j = 1; j < d; ++j) s += x[j] * x[j];
  return std::sqrt(s);
}

double chain_phi(const double* x, int d) { return 1.0 + bump_psi(chain_dist(x, d)); }

void chain_grad_phi(const double* x, int d, double* g) {
  for (int j = 0; j < d; ++j) g[j] = 0.0;
  const long long k = chain_center(x);
  double dx[3];
  dx[0] = x[0] - k;
  for (int j = 1; j < d; ++j) dx[j] = x[j];
  const double r = std::sqrt(sq(dx, d));
  if (r <= 0.0 || r >= 0.5) return;
  const double dpsi = bump_psi_dr(r);
  for (int j = 0; j < d; ++j) g[j] = dpsi * dx[j] / r;
}

std::vector<std::vector<double>> chain_centers(int d, int count) {
  std::vector<std::vector<double>> pts;
  for (int k = 0; k <= count; ++k) {
    std::vector<double> p(d, 0.0);
    p[0] = k;
    pts.push_back(std::move(p));
  }
  return pts;
}

// --- individual scenarios -------------------------------------------------------

CoefficientField make_flat(int d) {
  CoefficientField f;
  f.d = d;
  f.name = "flat-bm";
  f.rho = [](const double*) { return 1.0; };
  f.A = [d](const double*, double* out) { fill_identity(out, d); };
  f.grad_log_rho = [d](const double*, double* g) { std::fill(g, g + d, 0.0); };
  f.div_rows_A = [d](const double*, double* g) { std::fill(g, g + d, 0.0); };
  f.rho_A = [d](const double*, double* out) { fill_identity(out, d); };
  f.a_diagonal = f.a_identity = f.mu_lebesgue = true;
  f.has_factorization = true;
  return f;
}

CoefficientField make_ou(int d) {
  CoefficientField f;
  f.d = d;
  f.name = "gaussian-ou";
  f.rho = [d](const double* x) { return std::exp(-sq(x, d)); };
  f.A = [d](const double*, double* out) { fill_identity(out, d); };
  f.grad_log_rho = [d](const double* x, double* g) {
    for (int i = 0; i < d; ++i) g[i] = -2.0 * x[i];
  };
  f.div_rows_A = [d](const double*, double* g) { std::fill(g, g + d, 0.0); };
  f.rho_A = [d](const double* x, double* out) { fill_diag(out, d, std::exp(-sq(x, d))); };
  f.a_diagonal = f.a_identity = true;
  return f;
}

CoefficientField make_example43(int d) {
  CoefficientField f;
  f.d = d;
  f.name = "example-4.3";
  f.rho = [d](const double* x) { return std::exp(-sq(x, d)); };
  f.A = [d](const double* x, double* out) { fill_diag(out, d, std::exp(sq(x, d))); };
  f.grad_log_rho = [d](const double* x, double* g) {
    for (int i = 0; i < d; ++i) g[i] = -2.0 * x[i];
  };
  // (div A)_i = d_i e^{r^2} = 2 x_i e^{r^2}; written so that A * grad log rho
  // is its exact floating-point negative and the drift cancels to zero.
  f.div_rows_A = [d](const double* x, double* g) {
    const double e = std::exp(sq(x, d));
    for (int i = 0; i < d; ++i) g[i] = 2.0 * e * x[i];
  };
  f.rho_A = [d](const double*, double* out) { fill_identity(out, d); };
  f.a_diagonal = true;
  f.has_factorization = true;  // rho * A = id: bounded and elliptic
  return f;
}

CoefficientField make_gradient_drift(int d, const std::string& preset) {
  CoefficientField f;
  f.d = d;
  f.A = [d](const double*, double* out) { fill_identity(out, d); };
  f.div_rows_A = [d](const double*, double* g) { std::fill(g, g + d, 0.0); };
  f.a_diagonal = f.a_identity = true;
  if (preset == "bounded") {
    f.name = "gradient-drift[bounded]";
    // phi = sum_k cos(x_k): smooth, bounded above and below.
    auto rho_fn = [d](const double* x) {
      double p = 0.0;
      for (int i = 0; i < d; ++i) p += std::cos(x[i]);
      return std::exp(2.0 * p);
    };
    f.rho = rho_fn;
    f.grad_log_rho = [d](const double* x, double* g) {
      for (int i = 0; i < d; ++i) g[i] = -2.0 * std::sin(x[i]);
    };
    f.rho_A = [rho_fn, d](const double* x, double* out) { fill_diag(out, d, rho_fn(x)); };
    f.has_factorization = true;  // rho bounded away from 0 and infinity
  } else if (preset == "confining") {
    f.name = "gradient-drift[confining]";
    // phi = -|x|^2: confining drift, finite measure.
    f.rho = [d](const double* x) { return std::exp(-2.0 * sq(x, d)); };
    f.grad_log_rho = [d](const double* x, double* g) {
      for (int i = 0; i < d; ++i) g[i] = -4.0 * x[i];
    };
    f.rho_A = [d](const double* x, double* out) {
      fill_diag(out, d, std::exp(-2.0 * sq(x, d)));
    };
  } else {
    fail(ErrKind::schema,
         "gradient-drift: unknown preset '" + preset + "' (use bounded or confining)");
  }
  return f;
}

CoefficientField make_bump_gradient(int d) {
  CoefficientField f;
  f.d = d;
  f.name = "bump-chain-gradient";
  f.rho = [d](const double* x) { return std::exp(2.0 * chain_phi(x, d)); };
  f.A = [d](const double*, double* out) { fill_identity(out, d); };
  f.grad_log_rho = [d](const double* x, double* g) {
    chain_grad_phi(x, d, g);
    for (int i = 0; i < d; ++i) g[i] *= 2.0;
  };
  f.div_rows_A = [d](const double*, double* g) { std::fill(g, g + d, 0.0); };
  f.rho_A = [d](const double* x, double* out) {
    fill_diag(out, d, std::exp(2.0 * chain_phi(x, d)));
  };
  f.singular_distance = [d](const double* x) { return chain_dist(x, d); };
  f.singular_points = chain_centers(d, 12);
  {
    std::vector<double> e1(d, 0.0);
    e1[0] = 1.0;
    f.structure_rays.push_back(std::move(e1));
  }
  f.a_diagonal = f.a_identity = true;
  f.has_factorization = true;  // rho in [e^2, e^{2(1+max psi)}]
  return f;
}

CoefficientField make_davies(int d) {
  CoefficientField f;
  f.d = d;
  f.name = "davies";
  constexpr double beta = 2.0;
  auto a_of = [](double t) {
    const double lg = std::log(2.0 + t);
    return (1.0 + t) * std::pow(lg, beta);
  };
  f.rho = [](const double*) { return 1.0; };
  f.A = [d, a_of](const double* x, double* out) { fill_diag(out, d, a_of(sq(x, d))); };
  f.grad_log_rho = [d](const double*, double* g) { std::fill(g, g + d, 0.0); };
  // a depends on x through t = r^2, so (div A)_i = 2 x_i a'(t).
  f.div_rows_A = [d](const double* x, double* g) {
    const double t = sq(x, d);
    const double lg = std::log(2.0 + t);
    const double da = std::pow(lg, beta) + (1.0 + t) * beta * std::pow(lg, beta - 1.0) / (2.0 + t);
    for (int i = 0; i < d; ++i) g[i] = 2.0 * x[i] * da;
  };
  f.rho_A = f.A;
  f.a_diagonal = true;
  f.mu_lebesgue = true;
  return f;
}

const char* kTaskClassify = "classify";
const char* kTaskSemigroup = "semigroup-probe";
const char* kTaskGreen = "green-probe";
const char* kTaskSimulate = "simulate";
const char* kTaskOccupation = "occupation";

}  // namespace

CoefficientField bump_antisymmetric_scaled(int d, double scale) {
  if (d < 2 || d > 3)
    fail(ErrKind::schema, "bump-chain-antisymmetric: dimension must be 2 or 3");
  CoefficientField f;
  f.d = d;
  f.name = "bump-chain-antisymmetric";
  f.rho = [](const double*) { return 1.0; };
  f.A = [d](const double*, double* out) { fill_identity(out, d); };
  const int last = d - 1;
  f.C = [d, last, scale](const double* x, double* out) {
    std::fill(out, out + static_cast<size_t>(d) * d, 0.0);
    const double p = scale * chain_phi(x, d);
    out[0 * d + last] = p;
    out[last * d + 0] = -p;
  };
  f.grad_log_rho = [d](const double*, double* g) { std::fill(g, g + d, 0.0); };
  f.div_rows_A = [d](const double*, double* g) { std::fill(g, g + d, 0.0); };
  f.div_rows_C = [d, last, scale](const double* x, double* g) {
    double gp[3];
    chain_grad_phi(x, d, gp);
    std::fill(g, g + d, 0.0);
    g[0] = scale * gp[last];
    g[last] = -scale * gp[0];
  };
  f.rho_A = [d](const double*, double* out) { fill_identity(out, d); };
  f.rho_C = f.C;
  f.singular_distance = [d](const double* x) { return chain_dist(x, d); };
  f.singular_points = chain_centers(d, 12);
  {
    std::vector<double> e1(d, 0.0);
    e1[0] = 1.0;
    f.structure_rays.push_back(std::move(e1));
  }
  f.a_diagonal = f.a_identity = true;
  f.mu_lebesgue = true;
  f.has_factorization = true;
  return f;
}

std::vector<ScenarioInfo> scenario_catalog() {
  return {
      {"flat-bm", "Unit density with identity diffusion; the baseline random walk.",
       {2, 3}, {}},
      {"gaussian-ou", "Gaussian weight with identity diffusion; linear restoring drift.",
       {2, 3}, {}},
      {"example-4.3",
       "Gaussian weight against an exponentially growing diffusion whose product is the "
       "identity.",
       {2, 3}, {}},
      {"gradient-drift",
       "Identity diffusion with drift given by the gradient of a potential.",
       {2, 3}, {"bounded", "confining"}},
      {"bump-chain-gradient",
       "Weight e^{2 phi} with a half-infinite chain of compactly supported "
       "low-regularity bumps along the first axis.",
       {2, 3}, {}},
      {"bump-chain-antisymmetric",
       "Unit density, identity diffusion, and an anti-symmetric off-diagonal bump chain "
       "whose row divergence is singular at the centers.",
       {2, 3}, {}},
      {"davies",
       "Unit density with isotropic diffusion growing like r^2 (log r)^2; mass escapes "
       "to infinity in finite time.",
       {2, 3}, {}},
  };
}

CoefficientField make_scenario(const std::string& id, int dim, const std::string& variant) {
  if (dim < 2 || dim > 3)
    fail(ErrKind::schema, "scenario '" + id + "': dimension must be 2 or 3");
  if (id != "gradient-drift" && !variant.empty())
    fail(ErrKind::schema, "scenario '" + id + "' has no variants");
  if (id == "flat-bm") return make_flat(dim);
  if (id == "gaussian-ou") return make_ou(dim);
  if (id == "example-4.3") return make_example43(dim);
  if (id == "gradient-drift")
    return make_gradient_drift(dim, variant.empty() ? "bounded" : variant);
  if (id == "bump-chain-gradient") return make_bump_gradient(dim);
  if (id == "bump-chain-antisymmetric") return bump_antisymmetric_scaled(dim, 1.0);
  if (id == "davies") return make_davies(dim);
  std::string known;
  for (const auto& s : scenario_catalog()) known += (known.empty() ? "" : ", ") + s.id;
  fail(ErrKind::schema, "unknown scenario '" + id + "' (known: " + known + ")");
}

namespace {

void add(std::vector<ExpectedFact>& v, const char* key, const char* value,
         const char* anchor) {
  v.push_back({key, value, anchor});
}

}  // namespace

std::vector<ExpectedFact> expected_facts(const std::string& id, int dim,
                                         const std::string& variant) {
  std::vector<ExpectedFact> v;
  const bool d2 = dim == 2;
  if (id == "flat-bm" || id == "bump-chain-gradient" || id == "bump-chain-antisymmetric" ||
      (id == "gradient-drift" && (variant.empty() || variant == "bounded"))) {
    add(v, "conservative", "yes", "THM31_I");
    add(v, "dichotomy", d2 ? "recurrent" : "transient", d2 ? "THM43_I" : "THM43_II");
    add(v, "mu_finite", "infinite", "MU_ESTIMATE");
    add(v, "mu_invariant", "yes", "THM31_I");
    add(v, "mu_unique_infinitesimal", "yes", "THM41");
    add(v, "mu_unique_invariant", "yes", "PROP44_I");
    add(v, "l1_unique", "yes", "PROP22_II");
    return v;
  }
  if (id == "gaussian-ou") {
    add(v, "conservative", "yes", "THM31_I");
    add(v, "dichotomy", "recurrent", "THM33");
    add(v, "mu_finite", "finite", "MU_ESTIMATE");
    add(v, "mu_invariant", "yes", "THM31_I");
    add(v, "mu_unique_infinitesimal", "yes", "REC_UNIQ");
    add(v, "mu_unique_invariant", "yes", "REC_UNIQ");
    add(v, "l1_unique", "yes", "PROP22_II");
    return v;
  }
  if (id == "gradient-drift" && variant == "confining") {
    add(v, "conservative", "yes", "THM31_I");
    add(v, "dichotomy", "recurrent", "PROP22_IV");
    add(v, "mu_finite", "finite", "MU_ESTIMATE");
    add(v, "mu_invariant", "yes", "THM31_I");
    // The weighted ellipticity degenerates as the Gaussian weight decays, so
    // infinitesimal uniqueness comes through recurrence, not through S2.
    add(v, "mu_unique_infinitesimal", "yes", "REC_UNIQ");
    add(v, "mu_unique_invariant", "yes", "REC_UNIQ");
    add(v, "l1_unique", "yes", "PROP22_II");
    return v;
  }
  if (id == "example-4.3") {
    if (d2) {
      add(v, "conservative", "yes", "REC_CONS");
      add(v, "dichotomy", "recurrent", "THM43_I");
      add(v, "mu_finite", "finite", "MU_ESTIMATE");
      add(v, "mu_invariant", "yes", "PROP22_IV");
      add(v, "mu_unique_infinitesimal", "yes", "THM41");
      add(v, "mu_unique_invariant", "yes", "REC_UNIQ");
      add(v, "l1_unique", "yes", "PROP22_II");
    } else {
      add(v, "conservative", "no", "THM43_III");
      add(v, "dichotomy", "transient", "THM43_II");
      add(v, "mu_finite", "finite", "MU_ESTIMATE");
      add(v, "mu_invariant", "no", "THM43_III");
      add(v, "mu_unique_infinitesimal", "yes", "THM41");
    }
    return v;
  }
  if (id == "davies") {
    add(v, "conservative", "no", "MASS_PROBE");
    add(v, "mu_finite", "infinite", "MU_ESTIMATE");
    return v;
  }
  fail(ErrKind::schema, "expected_facts: unknown scenario '" + id + "'");
}

RunDefaults scenario_defaults(const std::string& id, int dim, const std::string& variant) {
  (void)make_scenario(id, dim, variant);  // validate the triple
  RunDefaults rd;
  // In dimension 3 the resolvent values saturate, and the saturation plateau
  // only becomes flat (ratio within the transient band) once alpha is small
  // against the capped box's spectral gap: one extra quartering step. In
  // dimension 2 the schedule stays short because the growth-ratio threshold
  // is a log-additive effect that thins out as alpha drops.
  if (dim == 3) rd.green.alphas.push_back(rd.green.alphas.back() / 4.0);
  rd.tasks = {kTaskClassify};
  for (const PlanEntry& pe : run_all_plan()) {
    if (pe.scenario == id && pe.dim == dim &&
        (pe.variant == variant || (pe.variant == "bounded" && variant.empty()))) {
      rd.tasks = pe.tasks;
      break;
    }
  }

  if (id == "gaussian-ou") {
    rd.sde.dt = 1e-3;
    rd.sde.T = 50.0;
    rd.sde.paths = 400;
    rd.sde.taming = false;
    rd.sde.ladder = {2.0, 4.0, 6.0, 8.0};
  } else if (id == "example-4.3") {
    rd.sde.dt = 1e-4;
    rd.sde.T = 5.0;
    rd.sde.paths = 200;
    rd.sde.taming = true;
    rd.sde.ladder = {2.0, 4.0, 8.0};
    rd.sde.stop_after_ladder = true;
  } else if (id == "bump-chain-gradient") {
    rd.sde.dt = 1e-3;
    rd.sde.T = 40.0;
    rd.sde.paths = 2000;
    rd.sde.taming = true;
    rd.sde.x0 = {1.0, 0.0, 0.0};
    rd.occupation.win_lo = {-0.5, -0.5};
    rd.occupation.win_hi = {2.5, 0.5};
    rd.occupation.bins_x = 12;
    rd.occupation.bins_y = 4;
    rd.occupation.burn_in = 1.0;
  } else if (id == "bump-chain-antisymmetric") {
    rd.sde.dt = 1e-3;
    rd.sde.T = 20.0;
    rd.sde.paths = 400;
    rd.sde.taming = true;
  } else if (id == "davies") {
    rd.sde.dt = 2e-4;
    rd.sde.T = 10.0;
    rd.sde.paths = 400;
    rd.sde.taming = true;
    rd.sde.ladder = {2.0, 4.0, 8.0, 16.0, 32.0};
    rd.sde.stop_after_ladder = true;
  } else if (id == "gradient-drift") {
    rd.sde.dt = 1e-3;
    rd.sde.T = 20.0;
    rd.sde.paths = 400;
    rd.sde.taming = false;
  } else {  // flat-bm
    rd.sde.dt = 1e-3;
    rd.sde.T = 10.0;
    rd.sde.paths = 200;
    rd.sde.taming = false;
  }
  return rd;
}

std::vector<PlanEntry> run_all_plan() {
  return {
      {"flat-bm", 2, "", {kTaskClassify, kTaskSemigroup, kTaskGreen}},
      {"flat-bm", 3, "", {kTaskClassify, kTaskGreen}},
      {"gaussian-ou", 2, "", {kTaskClassify, kTaskSemigroup, kTaskSimulate, kTaskOccupation}},
      {"example-4.3", 2, "", {kTaskClassify, kTaskGreen}},
      {"example-4.3", 3, "", {kTaskClassify, kTaskSemigroup, kTaskGreen}},
      {"gradient-drift", 2, "bounded", {kTaskClassify}},
      {"bump-chain-gradient", 2, "", {kTaskClassify, kTaskSimulate, kTaskOccupation}},
      {"bump-chain-antisymmetric", 2, "", {kTaskClassify, kTaskGreen}},
      {"bump-chain-antisymmetric", 3, "", {kTaskClassify, kTaskGreen}},
      {"davies", 2, "", {kTaskClassify, kTaskSemigroup}},
  };
}

}  // namespace divlab
