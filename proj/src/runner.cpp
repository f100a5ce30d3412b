#include "divlab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "divlab/criteria.hpp"
#include "divlab/quadrature.hpp"
#include "divlab/report.hpp"
#include "divlab/sde.hpp"
#include "divlab/semigroup.hpp"

namespace divlab {

const char* kDivlabVersion = "0.1.0";

namespace {

const std::vector<std::string>& canonical_tasks() {
  static const std::vector<std::string> k = {"classify", "semigroup-probe", "green-probe",
                                             "simulate", "occupation"};
  return k;
}

std::string join_strs(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += v[i];
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += fmt_g(v[i]);
  }
  return out;
}

std::string join_x0(const std::array<double, 3>& x0, int d) {
  std::vector<double> v(x0.begin(), x0.begin() + d);
  return join_doubles(v);
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// The full config-file schema; unknown sections or keys are rejected.
const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"run", {"scenario", "dim", "variant", "seed", "tasks", "out"}},
      {"classify", {"r_max", "directions", "radial_per_shell", "tail_fraction"}},
      {"semigroup", {"radii", "h", "T", "dt", "x0"}},
      {"green", {"alphas", "h", "g_radius", "r_cap_3d", "x0"}},
      {"simulate",
       {"dt", "T", "paths", "taming", "ladder", "stop_after_ladder", "x0", "abort_radius"}},
      {"occupation", {"window", "bins_x", "bins_y", "burn_in", "thin", "ref_subsample"}},
  };
  return k;
}

void reject_unknown_keys(const ConfigFile& cfg) {
  const auto& schema = config_schema();
  for (const std::string& sec : cfg.sections()) {
    auto it = schema.find(sec);
    if (it == schema.end()) {
      std::string known;
      for (const auto& kv : schema) known += (known.empty() ? "" : ", ") + kv.first;
      fail(ErrKind::schema,
           cfg.origin() + ": unknown section [" + sec + "] (known: " + known + ")");
    }
    for (const std::string& key : cfg.keys(sec)) {
      if (!it->second.count(key)) {
        fail(ErrKind::schema,
             cfg.origin() + ": unknown key [" + sec + "] " + key);
      }
    }
  }
}

std::vector<std::string> normalize_tasks(const std::vector<std::string>& requested) {
  for (const std::string& t : requested) {
    const auto& canon = canonical_tasks();
    if (std::find(canon.begin(), canon.end(), t) == canon.end()) {
      fail(ErrKind::schema,
           "unknown task '" + t + "' (known: " + join_strs(canon) + ")");
    }
  }
  std::vector<std::string> out;
  for (const std::string& t : canonical_tasks()) {
    if (std::find(requested.begin(), requested.end(), t) != requested.end())
      out.push_back(t);
  }
  return out;
}

std::array<double, 3> read_x0(const ConfigFile& cfg, const std::string& sec, int dim,
                              const std::array<double, 3>& fallback) {
  if (!cfg.has(sec, "x0")) return fallback;
  std::vector<double> v = cfg.get_doubles(sec, "x0", {});
  if (static_cast<int>(v.size()) != dim) {
    fail(ErrKind::schema, cfg.origin() + ": [" + sec + "] x0: expected " + fmt_i(dim) +
                              " coordinates, got " + fmt_i((long long)v.size()));
  }
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; ++i) out[i] = v[i];
  return out;
}

bool has_task(const RunConfig& rc, const std::string& t) {
  return std::find(rc.tasks.begin(), rc.tasks.end(), t) != rc.tasks.end();
}

struct Observation {
  std::string source;
  std::string value;
};

}  // namespace

std::string run_slug(const std::string& scenario, int dim, const std::string& variant) {
  std::string s = scenario + "-d" + fmt_i(dim);
  if (!variant.empty()) s += "-" + variant;
  return s;
}

RunConfig load_run_config(const ConfigFile* cfg, const CliOverrides& cli) {
  if (cfg) reject_unknown_keys(*cfg);

  RunConfig rc;
  rc.scenario = cli.scenario ? *cli.scenario
                             : (cfg ? cfg->get_str("run", "scenario", "") : "");
  if (rc.scenario.empty()) {
    fail(ErrKind::schema,
         "no scenario selected: set [run] scenario in the config or pass one on the "
         "command line");
  }
  rc.dim = cli.dim ? *cli.dim
                   : (cfg ? static_cast<int>(cfg->get_int("run", "dim", 2)) : 2);
  rc.variant =
      cli.variant ? *cli.variant : (cfg ? cfg->get_str("run", "variant", "") : "");
  if (cli.seed) {
    rc.seed = *cli.seed;
  } else if (cfg) {
    if (!cfg->has("run", "seed"))
      fail(ErrKind::schema, cfg->origin() + ": missing [run] seed (runs must be seeded "
                                            "explicitly; there is no clock default)");
    rc.seed = cfg->get_u64("run", "seed", 1);
  } else {
    rc.seed = 1;
  }
  rc.out_dir = cli.out_dir ? *cli.out_dir : (cfg ? cfg->get_str("run", "out", "out") : "out");

  rc.params = scenario_defaults(rc.scenario, rc.dim, rc.variant);

  std::vector<std::string> base =
      cfg && cfg->has("run", "tasks")
          ? normalize_tasks(cfg->get_strs("run", "tasks", {}))
          : rc.params.tasks;
  if (cli.tasks) {
    rc.tasks = normalize_tasks(*cli.tasks);
  } else if (cli.restrict_tasks) {
    std::vector<std::string> keep;
    for (const std::string& t : base) {
      if (std::find(cli.restrict_tasks->begin(), cli.restrict_tasks->end(), t) !=
          cli.restrict_tasks->end())
        keep.push_back(t);
    }
    rc.tasks = keep.empty() ? normalize_tasks(*cli.restrict_tasks) : normalize_tasks(keep);
  } else {
    rc.tasks = normalize_tasks(base);
  }
  if (rc.tasks.empty()) fail(ErrKind::schema, "task list resolved to empty");

  if (cfg) {
    const ConfigFile& c = *cfg;
    CriteriaSpec& cs = rc.params.criteria;
    cs.r_max = c.get_double("classify", "r_max", cs.r_max);
    cs.directions = static_cast<int>(c.get_int("classify", "directions", cs.directions));
    cs.radial_per_shell =
        static_cast<int>(c.get_int("classify", "radial_per_shell", cs.radial_per_shell));
    cs.tail_fraction = c.get_double("classify", "tail_fraction", cs.tail_fraction);
    MuQuadSpec& ms = rc.params.mu;
    ms.r_max = cs.r_max;
    ms.directions = cs.directions;
    ms.radial_per_shell = cs.radial_per_shell;

    MassProbeSpec& mp = rc.params.mass;
    mp.radii = c.get_doubles("semigroup", "radii", mp.radii);
    mp.h = c.get_double("semigroup", "h", mp.h);
    mp.T = c.get_double("semigroup", "T", mp.T);
    mp.dt = c.get_double("semigroup", "dt", mp.dt);
    mp.x0 = read_x0(c, "semigroup", rc.dim, mp.x0);

    GreenProbeSpec& gp = rc.params.green;
    gp.alphas = c.get_doubles("green", "alphas", gp.alphas);
    gp.h = c.get_double("green", "h", gp.h);
    gp.g_radius = c.get_double("green", "g_radius", gp.g_radius);
    gp.r_cap_3d = c.get_double("green", "r_cap_3d", gp.r_cap_3d);
    gp.x0 = read_x0(c, "green", rc.dim, gp.x0);

    SdeOptions& so = rc.params.sde;
    so.dt = c.get_double("simulate", "dt", so.dt);
    so.T = c.get_double("simulate", "T", so.T);
    so.paths = static_cast<int>(c.get_int("simulate", "paths", so.paths));
    so.taming = c.get_bool("simulate", "taming", so.taming);
    so.ladder = c.get_doubles("simulate", "ladder", so.ladder);
    so.stop_after_ladder =
        c.get_bool("simulate", "stop_after_ladder", so.stop_after_ladder);
    so.x0 = read_x0(c, "simulate", rc.dim, so.x0);
    so.abort_radius = c.get_double("simulate", "abort_radius", so.abort_radius);

    OccupationSpec& oc = rc.params.occupation;
    if (c.has("occupation", "window")) {
      std::vector<double> w = c.get_doubles("occupation", "window", {});
      if (w.size() != 4) {
        fail(ErrKind::schema, c.origin() +
                                  ": [occupation] window: expected 4 numbers "
                                  "(x_lo, y_lo, x_hi, y_hi), got " +
                                  fmt_i((long long)w.size()));
      }
      oc.win_lo = {w[0], w[1]};
      oc.win_hi = {w[2], w[3]};
    }
    oc.bins_x = static_cast<int>(c.get_int("occupation", "bins_x", oc.bins_x));
    oc.bins_y = static_cast<int>(c.get_int("occupation", "bins_y", oc.bins_y));
    oc.burn_in = c.get_double("occupation", "burn_in", oc.burn_in);
    oc.thin = static_cast<int>(c.get_int("occupation", "thin", oc.thin));
    oc.ref_subsample =
        static_cast<int>(c.get_int("occupation", "ref_subsample", oc.ref_subsample));
  }

  rc.params.criteria.seed = rc.seed;
  rc.params.mu.seed = rc.seed;
  rc.params.sde.seed = rc.seed;
  return rc;
}

namespace {

void echo_config(Report& rep, const RunConfig& rc) {
  auto& s = rep.section("config");
  rep.kv(s, "run.scenario", rc.scenario);
  rep.kv(s, "run.dim", rc.dim);
  rep.kv(s, "run.variant", rc.variant.empty() ? "-" : rc.variant);
  rep.kv(s, "run.seed", static_cast<std::int64_t>(rc.seed));
  rep.kv(s, "run.tasks", join_strs(rc.tasks));
  // The output directory is deliberately not echoed: the same run written to
  // two locations should produce byte-identical reports.
  const RunDefaults& p = rc.params;
  rep.kv(s, "classify.r_max", p.criteria.r_max);
  rep.kv(s, "classify.directions", p.criteria.directions);
  rep.kv(s, "classify.radial_per_shell", p.criteria.radial_per_shell);
  rep.kv(s, "classify.tail_fraction", p.criteria.tail_fraction);
  rep.kv(s, "semigroup.radii", join_doubles(p.mass.radii));
  rep.kv(s, "semigroup.h", p.mass.h);
  rep.kv(s, "semigroup.T", p.mass.T);
  rep.kv(s, "semigroup.dt", p.mass.dt);
  rep.kv(s, "semigroup.x0", join_x0(p.mass.x0, rc.dim));
  rep.kv(s, "green.alphas", join_doubles(p.green.alphas));
  rep.kv(s, "green.h", p.green.h);
  rep.kv(s, "green.g_radius", p.green.g_radius);
  rep.kv(s, "green.r_cap_3d", p.green.r_cap_3d);
  rep.kv(s, "green.x0", join_x0(p.green.x0, rc.dim));
  rep.kv(s, "simulate.dt", p.sde.dt);
  rep.kv(s, "simulate.T", p.sde.T);
  rep.kv(s, "simulate.paths", p.sde.paths);
  rep.kv(s, "simulate.taming", p.sde.taming ? "yes" : "no");
  rep.kv(s, "simulate.ladder", join_doubles(p.sde.ladder));
  rep.kv(s, "simulate.stop_after_ladder", p.sde.stop_after_ladder ? "yes" : "no");
  rep.kv(s, "simulate.x0", join_x0(p.sde.x0, rc.dim));
  rep.kv(s, "simulate.abort_radius", p.sde.abort_radius);
  rep.kv(s, "occupation.window",
         fmt_g(p.occupation.win_lo[0]) + "," + fmt_g(p.occupation.win_lo[1]) + "," +
             fmt_g(p.occupation.win_hi[0]) + "," + fmt_g(p.occupation.win_hi[1]));
  rep.kv(s, "occupation.bins_x", p.occupation.bins_x);
  rep.kv(s, "occupation.bins_y", p.occupation.bins_y);
  rep.kv(s, "occupation.burn_in", p.occupation.burn_in);
  rep.kv(s, "occupation.thin", p.occupation.thin);
  rep.kv(s, "occupation.ref_subsample", p.occupation.ref_subsample);
}

void emit_criterion_section(Report& rep, const CriterionVerdict& cv) {
  auto& s = rep.section(std::string("criterion ") + criterion_name(cv.id));
  rep.kv(s, "anchor", criterion_name(cv.id));
  rep.kv(s, "verdict", verdict_name(cv.verdict));
  if (cv.fit) {
    const GrowthFit& fit = *cv.fit;
    rep.kv(s, "fit.n0", fit.N0);
    rep.kv(s, "fit.c1", fit.c1);
    rep.kv(s, "fit.c2", fit.c2);
    rep.kv(s, "fit.beta_vol", fit.beta_vol);
    rep.kv(s, "fit.C1", fit.C1);
    rep.kv(s, "fit.alpha", fit.alpha);
    rep.kv(s, "fit.margin", fit.margin);
  }
  for (const auto& [name, value] : cv.constants) rep.kv(s, name, value);
  if (cv.witness) {
    rep.kv(s, "witness.x", join_doubles(cv.witness->x));
    rep.kv(s, "witness.lhs", cv.witness->lhs);
    rep.kv(s, "witness.rhs", cv.witness->rhs);
    if (!cv.witness->note.empty()) rep.kv(s, "witness.note", cv.witness->note);
  }
  if (!cv.caveat.empty()) rep.kv(s, "caveat", cv.caveat);
  if (!cv.error.empty()) rep.kv(s, "error", cv.error);
}

void emit_classification(Report& rep, const Classification& c) {
  auto& s = rep.section("classification");
  auto from = [](const std::string& f) { return f.empty() ? std::string("none") : f; };
  rep.kv(s, "conservative", ynu_name(c.conservative));
  rep.kv(s, "conservative_from", from(c.conservative_from));
  rep.kv(s, "dichotomy", dichotomy_name(c.dichotomy));
  rep.kv(s, "dichotomy_from", from(c.dichotomy_from));
  rep.kv(s, "mu_invariant", ynu_name(c.mu_invariant));
  rep.kv(s, "mu_invariant_from", from(c.mu_invariant_from));
  rep.kv(s, "mu_unique_infinitesimal", ynu_name(c.mu_unique_infinitesimal));
  rep.kv(s, "mu_unique_infinitesimal_from", from(c.mu_unique_infinitesimal_from));
  rep.kv(s, "mu_unique_invariant", inv_unique_name(c.mu_unique_invariant));
  rep.kv(s, "mu_unique_invariant_from", from(c.mu_unique_invariant_from));
  rep.kv(s, "l1_unique", ynu_name(c.l1_unique));
  rep.kv(s, "l1_unique_from", from(c.l1_unique_from));
  rep.kv(s, "mu_finite", finiteness_name(c.mu_finite));
  rep.kv(s, "mu_total", c.mu_total);
  rep.kv(s, "rho_bounded", c.rho_bounded ? "yes" : "no");
  rep.kv(s, "inv_rho_bounded", c.inv_rho_bounded ? "yes" : "no");
}

}  // namespace

RunOutcome run_one(const RunConfig& rc) {
  const auto t_total = std::chrono::steady_clock::now();
  CoefficientField f = make_scenario(rc.scenario, rc.dim, rc.variant);
  const std::vector<ExpectedFact> expected = expected_facts(rc.scenario, rc.dim, rc.variant);

  RunOutcome out;
  out.run_dir = rc.out_dir + "/" + run_slug(rc.scenario, rc.dim, rc.variant);
  ensure_directory(out.run_dir);

  Report rep;
  {
    auto& s = rep.section("meta");
    rep.kv(s, "tool", "divlab");
    rep.kv(s, "version", kDivlabVersion);
    rep.kv(s, "scenario", rc.scenario);
    rep.kv(s, "dim", rc.dim);
    rep.kv(s, "variant", rc.variant.empty() ? "-" : rc.variant);
    rep.kv(s, "seed", static_cast<std::int64_t>(rc.seed));
  }
  echo_config(rep, rc);

  std::vector<std::pair<std::string, double>> timings;
  bool structure_ok = false;

  {
    const auto t0 = std::chrono::steady_clock::now();
    auto& s = rep.section("structural");
    try {
      StructureSummary ss = structural_check(f, 6.0, 256, rc.seed);
      rep.kv(s, "samples", ss.samples);
      rep.kv(s, "symmetry_max_dev", ss.symmetry_max_dev);
      rep.kv(s, "antisymmetry_max_dev", ss.antisymmetry_max_dev);
      rep.kv(s, "rho_min", ss.rho_min);
      rep.kv(s, "phi_a_min", ss.phi_a_min);
      rep.kv(s, "status", ss.ok() ? "ok" : "violation");
      if (!ss.ok()) {
        rep.kv(s, "violation", ss.violation);
        rep.kv(s, "note", "structural violation: remaining tasks skipped");
        out.task_error = true;
      } else {
        structure_ok = true;
      }
    } catch (const Error& e) {
      rep.kv(s, "error", std::string(err_kind_name(e.kind())) + ": " + e.what());
      out.task_error = true;
    }
    timings.emplace_back("structural", elapsed_s(t0));
  }

  MuEstimate mu;
  bool mu_ok = false;
  if (structure_ok) {
    const auto t0 = std::chrono::steady_clock::now();
    auto& s = rep.section("mu");
    try {
      mu = estimate_mu(f, rc.params.mu);
      rep.kv(s, "finiteness", finiteness_name(mu.finiteness));
      rep.kv(s, "total", mu.total);
      rep.kv(s, "shells", static_cast<std::int64_t>(mu.curve.radii.size()));
      if (!mu.curve.radii.empty()) rep.kv(s, "r_max", mu.curve.radii.back());
      mu_ok = true;
    } catch (const Error& e) {
      rep.kv(s, "error", std::string(err_kind_name(e.kind())) + ": " + e.what());
      out.task_error = true;
    }
    timings.emplace_back("mu", elapsed_s(t0));
  }

  std::vector<CriterionVerdict> verdicts;
  Classification cls;
  bool have_cls = false;
  if (structure_ok && has_task(rc, "classify")) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!mu_ok) {
      auto& s = rep.section("classification");
      rep.kv(s, "error", "skipped: measure estimate failed");
    } else {
      verdicts = run_all_criteria(f, mu, rc.params.criteria);
      for (const CriterionVerdict& cv : verdicts) emit_criterion_section(rep, cv);
      try {
        cls = classify(f, verdicts, mu, rc.params.criteria);
        have_cls = true;
        emit_classification(rep, cls);
      } catch (const Error& e) {
        auto& s = rep.section("classification");
        rep.kv(s, "error", std::string(err_kind_name(e.kind())) + ": " + e.what());
        out.task_error = true;
      }
    }
    timings.emplace_back("classify", elapsed_s(t0));
  }

  MassProbeResult massr;
  bool have_mass = false;
  if (structure_ok && has_task(rc, "semigroup-probe")) {
    const auto t0 = std::chrono::steady_clock::now();
    auto& s = rep.section("probe semigroup");
    try {
      massr = conservativeness_probe(f, rc.params.mass);
      have_mass = true;
      rep.kv(s, "verdict", massr.verdict);
      if (!massr.caveat.empty()) rep.kv(s, "caveat", massr.caveat);
      rep.kv(s, "radii", join_doubles(massr.radii));
      rep.kv(s, "final_mass", join_doubles(massr.final_mass));
      rep.kv(s, "deficit", join_doubles(massr.deficit));
      rep.kv(s, "overshoot", massr.overshoot);
      rep.kv(s, "fit_log_a", massr.fit_log_a);
      rep.kv(s, "fit_rate_b", massr.fit_rate_b);
      std::int64_t iters = 0;
      double monotone = 0.0;
      for (const MassHistory& hh : massr.histories) {
        iters += hh.solver_iterations;
        monotone = std::max(monotone, hh.monotone_violation);
      }
      rep.kv(s, "monotone_violation", monotone);
      rep.kv(s, "solver_iterations", iters);
    } catch (const Error& e) {
      rep.kv(s, "error", std::string(err_kind_name(e.kind())) + ": " + e.what());
      out.task_error = true;
    }
    timings.emplace_back("semigroup_probe", elapsed_s(t0));
  }

  GreenProbeResult greenr;
  bool have_green = false;
  if (structure_ok && has_task(rc, "green-probe")) {
    const auto t0 = std::chrono::steady_clock::now();
    auto& s = rep.section("probe green");
    try {
      greenr = green_probe(f, rc.params.green);
      have_green = true;
      rep.kv(s, "verdict", greenr.verdict);
      if (!greenr.caveat.empty()) rep.kv(s, "caveat", greenr.caveat);
      rep.kv(s, "alphas", join_doubles(greenr.alphas));
      rep.kv(s, "radii", join_doubles(greenr.radii));
      rep.kv(s, "values", join_doubles(greenr.values));
      rep.kv(s, "ratios", join_doubles(greenr.ratios));
    } catch (const Error& e) {
      rep.kv(s, "error", std::string(err_kind_name(e.kind())) + ": " + e.what());
      out.task_error = true;
    }
    timings.emplace_back("green_probe", elapsed_s(t0));
  }

  EnsembleSummary ens;
  bool have_ens = false;
  if (structure_ok && has_task(rc, "simulate")) {
    const auto t0 = std::chrono::steady_clock::now();
    auto& s = rep.section("mc simulate");
    try {
      ens = simulate_ensemble(f, rc.params.sde);
      have_ens = true;
      rep.kv(s, "paths", ens.paths);
      rep.kv(s, "aborted", ens.aborted);
      std::int64_t flagged = 0;
      for (const PathRecord& pr : ens.records) flagged += pr.drift_flagged_steps;
      rep.kv(s, "drift_flagged_steps", flagged);
      rep.kv(s, "mean_final_radius", ens.mean_final_radius);
      rep.kv(s, "explosion", ens.explosion_verdict.empty() ? "none"
                                                           : ens.explosion_verdict);
      rep.kv(s, "ladder", join_doubles(ens.ladder));
      rep.kv(s, "crossing_fraction", join_doubles(ens.crossing_fraction));
      rep.kv(s, "median_crossing", join_doubles(ens.median_crossing));
    } catch (const Error& e) {
      rep.kv(s, "error", std::string(err_kind_name(e.kind())) + ": " + e.what());
      out.task_error = true;
    }
    timings.emplace_back("simulate", elapsed_s(t0));
  }

  OccupationResult occ;
  bool have_occ = false;
  if (structure_ok && has_task(rc, "occupation")) {
    const auto t0 = std::chrono::steady_clock::now();
    auto& s = rep.section("mc occupation");
    try {
      occ = occupation_histogram(f, rc.params.sde, rc.params.occupation);
      have_occ = true;
      rep.kv(s, "samples_total", occ.samples_total);
      rep.kv(s, "samples_in_window", occ.samples_in_window);
      rep.kv(s, "bins",
             fmt_i(rc.params.occupation.bins_x) + "x" + fmt_i(rc.params.occupation.bins_y));
      rep.kv(s, "l1_distance", occ.l1_distance);
    } catch (const Error& e) {
      rep.kv(s, "error", std::string(err_kind_name(e.kind())) + ": " + e.what());
      out.task_error = true;
    }
    timings.emplace_back("occupation", elapsed_s(t0));
  }

  // --- agreement matrix -------------------------------------------------------
  {
    std::map<std::string, std::vector<Observation>> obs;
    if (have_cls) {
      auto put = [&obs](const char* key, const std::string& value) {
        if (value != "unknown") obs[key].push_back({"classifier", value});
      };
      put("conservative", ynu_name(cls.conservative));
      put("dichotomy", dichotomy_name(cls.dichotomy));
      put("mu_invariant", ynu_name(cls.mu_invariant));
      put("mu_unique_infinitesimal", ynu_name(cls.mu_unique_infinitesimal));
      put("mu_unique_invariant", inv_unique_name(cls.mu_unique_invariant));
      put("l1_unique", ynu_name(cls.l1_unique));
    }
    if (have_mass) {
      if (massr.verdict == "conservative-signature")
        obs["conservative"].push_back({"semigroup-probe", "yes"});
      else if (massr.verdict == "mass-defect")
        obs["conservative"].push_back({"semigroup-probe", "no"});
    }
    if (have_green) {
      if (greenr.verdict == "recurrent-signature")
        obs["dichotomy"].push_back({"green-probe", "recurrent"});
      else if (greenr.verdict == "transient-signature")
        obs["dichotomy"].push_back({"green-probe", "transient"});
    }
    if (have_ens) {
      if (ens.explosion_verdict == "explosive-signature")
        obs["conservative"].push_back({"mc-simulate", "no"});
      else if (ens.explosion_verdict == "no-explosion-signature")
        obs["conservative"].push_back({"mc-simulate", "yes"});
    }
    if (mu_ok && mu.finiteness != Finiteness::unknown)
      obs["mu_finite"].push_back({"mu-quadrature", finiteness_name(mu.finiteness)});

    auto& s = rep.section("agreement");
    for (const ExpectedFact& ef : expected) {
      const std::vector<Observation>& cands = obs[ef.key];
      std::string status;
      if (cands.empty()) {
        status = "inconclusive";
        ++out.inconclusive;
      } else {
        bool mismatch = false;
        for (const Observation& o : cands) mismatch |= (o.value != ef.value);
        status = mismatch ? "contradiction" : "agree";
        if (mismatch)
          ++out.contradictions;
        else
          ++out.agree;
      }
      std::string sources;
      for (const Observation& o : cands) {
        if (!sources.empty()) sources += ',';
        sources += o.source + ":" + o.value;
      }
      if (sources.empty()) sources = "none";
      rep.kv(s, ef.key, "expected=" + ef.value +
                            " observed=" + (cands.empty() ? "unknown" : cands[0].value) +
                            " status=" + status + " anchor=" + ef.anchor +
                            " observed_from=" + (cands.empty() ? "none" : cands[0].source) +
                            " sources=" + sources);
    }
    rep.kv(s, "agree", out.agree);
    rep.kv(s, "contradictions", out.contradictions);
    rep.kv(s, "inconclusive", out.inconclusive);
  }

  {
    auto& s = rep.section("notes");
    rep.kv(s, "sampling",
           "criterion verdicts rest on finite shell samples; almost-everywhere "
           "hypotheses cannot be distinguished from behaviour off an unobserved null set");
    rep.kv(s, "weak_identity",
           "the weak divergence-free identity is certified on a finite test-function "
           "battery, not on all smooth compactly supported functions");
    rep.kv(s, "probes",
           "semigroup and resolvent probes evaluate one probe point on truncated boxes; "
           "signatures are evidence, not proofs");
    rep.kv(s, "simulation",
           "path simulation approximates the law of the process; tamed or flagged drift "
           "steps near singular points are recorded in the run summary");
  }

  // --- CSV sidecars -----------------------------------------------------------
  if (mu_ok) {
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < mu.curve.radii.size(); ++i) {
      rows.push_back({fmt_g(mu.curve.radii[i]), fmt_g(mu.curve.shell_mass[i]),
                      fmt_g(mu.curve.ball_mass[i])});
    }
    write_csv(out.run_dir + "/mu_curve.csv", {"r", "shell_mass", "ball_mass"}, rows);
  }
  if (!verdicts.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const CriterionVerdict& cv : verdicts) {
      if (!cv.fit) continue;
      const GrowthFit& fit = *cv.fit;
      for (size_t i = 0; i < fit.radii.size(); ++i) {
        const double slope =
            (i >= 1 && i - 1 < fit.slopes.size()) ? fit.slopes[i - 1]
                                                  : std::numeric_limits<double>::quiet_NaN();
        rows.push_back({criterion_name(cv.id), fmt_g(fit.radii[i]),
                        i < fit.values.size() ? fmt_g(fit.values[i]) : "nan",
                        fmt_g(slope)});
      }
    }
    write_csv(out.run_dir + "/criteria.csv", {"criterion", "radius", "value", "slope"},
              rows);
  }
  if (have_mass) {
    std::vector<std::vector<std::string>> rows;
    for (const MassHistory& hh : massr.histories) {
      for (size_t i = 0; i < hh.times.size(); ++i) {
        rows.push_back({fmt_g(hh.R), fmt_g(hh.times[i]), fmt_g(hh.mass[i])});
      }
    }
    write_csv(out.run_dir + "/semigroup_mass.csv", {"R", "t", "mass"}, rows);
  }
  if (have_green) {
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < greenr.alphas.size(); ++i) {
      const double ratio = i >= 1 && i - 1 < greenr.ratios.size()
                               ? greenr.ratios[i - 1]
                               : std::numeric_limits<double>::quiet_NaN();
      rows.push_back({fmt_g(greenr.alphas[i]),
                      i < greenr.radii.size() ? fmt_g(greenr.radii[i]) : "nan",
                      i < greenr.values.size() ? fmt_g(greenr.values[i]) : "nan",
                      fmt_g(ratio)});
    }
    write_csv(out.run_dir + "/green_probe.csv", {"alpha", "R", "value", "ratio"}, rows);
  }
  if (have_ens && !ens.ladder.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < ens.ladder.size(); ++i) {
      rows.push_back({fmt_g(ens.ladder[i]), fmt_g(ens.crossing_fraction[i]),
                      fmt_g(ens.median_crossing[i])});
    }
    write_csv(out.run_dir + "/mc_crossings.csv", {"radius", "fraction", "median_time"},
              rows);
  }
  if (have_occ) {
    const OccupationSpec& oc = rc.params.occupation;
    const double dx = (oc.win_hi[0] - oc.win_lo[0]) / oc.bins_x;
    const double dy = (oc.win_hi[1] - oc.win_lo[1]) / oc.bins_y;
    std::vector<std::vector<std::string>> rows;
    for (int iy = 0; iy < oc.bins_y; ++iy) {
      for (int ix = 0; ix < oc.bins_x; ++ix) {
        const size_t b = static_cast<size_t>(iy) * oc.bins_x + ix;
        rows.push_back({fmt_i(ix), fmt_i(iy), fmt_g(oc.win_lo[0] + (ix + 0.5) * dx),
                        fmt_g(oc.win_lo[1] + (iy + 0.5) * dy), fmt_g(occ.histogram[b]),
                        fmt_g(occ.reference[b])});
      }
    }
    write_csv(out.run_dir + "/occupation.csv",
              {"ix", "iy", "xmid", "ymid", "histogram", "reference"}, rows);
  }

  {
    auto& s = rep.section("timings");
    for (const auto& [name, secs] : timings) rep.kv(s, name + "_seconds", fmt_g(secs, 4));
    rep.kv(s, "total_seconds", fmt_g(elapsed_s(t_total), 4));
  }

  out.exit_code = out.task_error          ? 1
                  : out.contradictions > 0 ? 2
                  : out.inconclusive > 0   ? 3
                                           : 0;
  out.report_text = rep.render();
  out.report_path = out.run_dir + "/report.txt";
  write_text_file(out.report_path, out.report_text);
  return out;
}

RunOutcome run_all(const std::string& out_dir, std::uint64_t seed) {
  ensure_directory(out_dir);
  RunOutcome agg;
  agg.run_dir = out_dir;
  auto severity = [](int code) {
    switch (code) {
      case 1: return 3;
      case 2: return 2;
      case 3: return 1;
      default: return 0;
    }
  };
  std::string summary;
  int worst = 0;
  for (const PlanEntry& pe : run_all_plan()) {
    RunConfig rc;
    rc.scenario = pe.scenario;
    rc.dim = pe.dim;
    rc.variant = pe.variant;
    rc.seed = seed;
    rc.out_dir = out_dir;
    rc.tasks = pe.tasks;
    rc.params = scenario_defaults(pe.scenario, pe.dim, pe.variant);
    rc.params.criteria.seed = seed;
    rc.params.mu.seed = seed;
    rc.params.sde.seed = seed;
    RunOutcome ro = run_one(rc);
    agg.agree += ro.agree;
    agg.contradictions += ro.contradictions;
    agg.inconclusive += ro.inconclusive;
    agg.task_error = agg.task_error || ro.task_error;
    if (severity(ro.exit_code) > severity(worst)) worst = ro.exit_code;
    summary += run_slug(pe.scenario, pe.dim, pe.variant) + ": exit=" + fmt_i(ro.exit_code) +
               " agree=" + fmt_i(ro.agree) + " contradictions=" + fmt_i(ro.contradictions) +
               " inconclusive=" + fmt_i(ro.inconclusive) + "\n";
  }
  summary += "total: exit=" + fmt_i(worst) + " agree=" + fmt_i(agg.agree) +
             " contradictions=" + fmt_i(agg.contradictions) +
             " inconclusive=" + fmt_i(agg.inconclusive) + "\n";
  agg.exit_code = worst;
  agg.report_path = out_dir + "/summary.txt";
  agg.report_text = summary;
  write_text_file(agg.report_path, summary);
  return agg;
}

}  // namespace divlab
