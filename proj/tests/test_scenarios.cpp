#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "divlab/field.hpp"
#include "divlab/scenarios.hpp"
#include "doctest.h"

using namespace divlab;

TEST_SUITE("scenarios") {

TEST_CASE("catalog lists the seven families with their dimensions and variants") {
  auto cat = scenario_catalog();
  REQUIRE(cat.size() == 7);
  std::vector<std::string> ids;
  for (const auto& s : cat) {
    ids.push_back(s.id);
    CHECK_FALSE(s.summary.empty());
    REQUIRE_FALSE(s.dims.empty());
    for (int d : s.dims) CHECK((d == 2 || d == 3));
    if (s.id == "gradient-drift") {
      REQUIRE(s.variants.size() == 2);
      CHECK(s.variants[0] == "bounded");
      CHECK(s.variants[1] == "confining");
    } else {
      CHECK(s.variants.empty());
    }
  }
  const std::vector<std::string> want = {"flat-bm",
                                         "gaussian-ou",
                                         "example-4.3",
                                         "gradient-drift",
                                         "bump-chain-gradient",
                                         "bump-chain-antisymmetric",
                                         "davies"};
  CHECK(ids == want);
}

TEST_CASE("every catalog entry builds and passes a dense structural sweep") {
  for (const auto& info : scenario_catalog()) {
    std::vector<std::string> variants = info.variants;
    if (variants.empty()) variants.push_back("");
    for (int d : info.dims) {
      for (const auto& v : variants) {
        auto f = make_scenario(info.id, d, v);
        CHECK(f.d == d);
        CHECK(f.name == info.id);
        auto s = structural_check(f, 10.0, 10000, 3);
        INFO(info.id, "/", v, " d=", d, " violation=", s.violation);
        CHECK(s.ok());
        CHECK(s.finite);
      }
    }
  }
}

TEST_CASE("construction errors carry precise messages") {
  try {
    make_scenario("flat-bm", 4, "");
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrKind::schema);
    CHECK(std::string(e.what()).find("dimension must be 2 or 3") != std::string::npos);
  }
  try {
    make_scenario("flat-bm", 2, "confining");
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("has no variants") != std::string::npos);
  }
  try {
    make_scenario("wiener", 2, "");
    FAIL("expected a schema error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("unknown scenario 'wiener'") != std::string::npos);
    CHECK(msg.find("known:") != std::string::npos);
    CHECK(msg.find("davies") != std::string::npos);
  }
  CHECK_THROWS_AS(expected_facts("wiener", 2, ""), Error);
  CHECK_THROWS_AS(scenario_defaults("davies", 2, "confining"), Error);
}

TEST_CASE("gradient-drift defaults to the bounded variant") {
  auto a = make_scenario("gradient-drift", 2, "");
  auto b = make_scenario("gradient-drift", 2, "bounded");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> g(-5.0, 5.0);
  for (int t = 0; t < 50; ++t) {
    double x[3] = {g(rng), g(rng), 0.0};
    CHECK(a.rho(x) == b.rho(x));
  }
}

TEST_CASE("bounded gradient potential keeps the density inside fixed bounds") {
  auto f = make_scenario("gradient-drift", 2, "bounded");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> g(-20.0, 20.0);
  const double lo = std::exp(-4.0), hi = std::exp(4.0);
  for (int t = 0; t < 2000; ++t) {
    double x[3] = {g(rng), g(rng), 0.0};
    const double r = f.rho(x);
    CHECK(r >= lo);
    CHECK(r <= hi);
  }
}

TEST_CASE("bump chain density: plateau level e^2, peak under 17, centers flagged") {
  auto f = make_scenario("bump-chain-gradient", 2, "");
  REQUIRE(f.singular_distance);
  REQUIRE_FALSE(f.singular_points.empty());

  double rho_min = 1e300, rho_max = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double x[3] = {-10.0 + i * 0.005, 0.0, 0.0};
    const double r = f.rho(x);
    rho_min = std::min(rho_min, r);
    rho_max = std::max(rho_max, r);
  }
  CHECK(rho_min == doctest::Approx(std::exp(2.0)).epsilon(1e-9));
  CHECK(rho_max <= 16.9);
  // The sampled peak off the bump centers (frozen from a fine axis sweep).
  const double peak_x[3] = {-0.277180, 0.0, 0.0};
  CHECK(f.rho(peak_x) >= 16.81);

  // Off-axis the chain decays back to the plateau.
  const double off[3] = {0.0, 3.0, 0.0};
  CHECK(f.rho(off) == doctest::Approx(std::exp(2.0)).epsilon(1e-9));
}

TEST_CASE("bump chain drift blows up like a negative-power law toward a center") {
  auto f = make_scenario("bump-chain-gradient", 2, "");
  const auto& c = f.singular_points.front();
  auto sup_beta = [&](double eps) {
    double worst = 0.0;
    for (int k = 0; k < 32; ++k) {
      const double th = 2.0 * std::acos(-1.0) * k / 32.0;
      const double x[3] = {c[0] + eps * std::cos(th), c[1] + eps * std::sin(th), 0.0};
      double b[3];
      if (!beta_drift(f, x, b)) continue;
      worst = std::max(worst, std::hypot(b[0], b[1]));
    }
    return worst;
  };
  const double s1 = sup_beta(1e-1);
  const double s2 = sup_beta(1e-2);
  const double s3 = sup_beta(1e-3);
  const double s4 = sup_beta(1e-4);
  CHECK(s1 > 0.5);
  CHECK(s2 > s1);
  CHECK(s3 > s2);
  CHECK(s4 > s3);
  CHECK(s4 / s1 >= 8.0);  // cube-root cusp: three decades give a factor ~10
}

TEST_CASE("antisymmetric chain scales linearly in its scale parameter") {
  auto f1 = bump_antisymmetric_scaled(2, 1.0);
  auto fh = bump_antisymmetric_scaled(2, 0.5);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> g(-8.0, 8.0);
  for (int t = 0; t < 200; ++t) {
    double x[3] = {g(rng), g(rng), 0.0};
    double c1[9], ch[9];
    eval_C(f1, x, c1);
    eval_C(fh, x, ch);
    for (int i = 0; i < 4; ++i) CHECK(ch[i] == doctest::Approx(0.5 * c1[i]).epsilon(1e-14));
    CHECK(f1.rho(x) == 1.0);
  }
  CHECK_THROWS_AS(bump_antisymmetric_scaled(1, 1.0), Error);
}

TEST_CASE("expected fact tables carry the documented shape") {
  CHECK(expected_facts("flat-bm", 2).size() == 7);
  CHECK(expected_facts("flat-bm", 3).size() == 7);
  CHECK(expected_facts("gaussian-ou", 2).size() == 7);
  CHECK(expected_facts("gradient-drift", 2, "bounded").size() == 7);
  CHECK(expected_facts("gradient-drift", 2, "confining").size() == 7);
  CHECK(expected_facts("bump-chain-gradient", 2).size() == 7);
  CHECK(expected_facts("bump-chain-antisymmetric", 3).size() == 7);
  CHECK(expected_facts("example-4.3", 2).size() == 7);
  CHECK(expected_facts("example-4.3", 3).size() == 5);
  CHECK(expected_facts("davies", 2).size() == 2);

  for (const auto& fact : expected_facts("davies", 2)) {
    if (fact.key == "conservative") {
      CHECK(fact.value == "no");
      CHECK(fact.anchor == "MASS_PROBE");
    }
    if (fact.key == "mu_finite") {
      CHECK(fact.value == "infinite");
      CHECK(fact.anchor == "MU_ESTIMATE");
    }
  }
  // Dimension flips the planar/spatial dichotomy for the Lebesgue families.
  for (const auto& fact : expected_facts("flat-bm", 2))
    if (fact.key == "dichotomy") CHECK(fact.value == "recurrent");
  for (const auto& fact : expected_facts("flat-bm", 3))
    if (fact.key == "dichotomy") CHECK(fact.value == "transient");
}

TEST_CASE("per-scenario run defaults match the documented protocol") {
  auto ou = scenario_defaults("gaussian-ou", 2);
  CHECK(ou.sde.dt == 1e-3);
  CHECK(ou.sde.T == 50.0);
  CHECK(ou.sde.paths == 400);
  CHECK_FALSE(ou.sde.taming);
  CHECK(ou.sde.ladder == std::vector<double>{2.0, 4.0, 6.0, 8.0});
  CHECK(ou.tasks == std::vector<std::string>{"classify", "semigroup-probe", "simulate",
                                             "occupation"});

  auto e43 = scenario_defaults("example-4.3", 2);
  CHECK(e43.sde.dt == 1e-4);
  CHECK(e43.sde.T == 5.0);
  CHECK(e43.sde.paths == 200);
  CHECK(e43.sde.taming);
  CHECK(e43.sde.stop_after_ladder);
  CHECK(e43.sde.ladder == std::vector<double>{2.0, 4.0, 8.0});

  auto bcg = scenario_defaults("bump-chain-gradient", 2);
  CHECK(bcg.sde.paths == 2000);
  CHECK(bcg.sde.T == 40.0);
  CHECK(bcg.sde.taming);
  CHECK(bcg.sde.x0[0] == 1.0);
  CHECK(bcg.occupation.win_lo[0] == -0.5);
  CHECK(bcg.occupation.win_hi[0] == 2.5);
  CHECK(bcg.occupation.win_hi[1] == 0.5);
  CHECK(bcg.occupation.bins_x == 12);
  CHECK(bcg.occupation.bins_y == 4);
  CHECK(bcg.occupation.burn_in == 1.0);

  auto davies = scenario_defaults("davies", 2);
  CHECK(davies.sde.dt == 2e-4);
  CHECK(davies.sde.taming);
  CHECK(davies.sde.stop_after_ladder);
  CHECK(davies.sde.ladder == std::vector<double>{2.0, 4.0, 8.0, 16.0, 32.0});
  CHECK(davies.tasks == std::vector<std::string>{"classify", "semigroup-probe"});

  // The planar schedule has five resolvent shifts; d=3 appends a sixth.
  auto flat2 = scenario_defaults("flat-bm", 2);
  auto flat3 = scenario_defaults("flat-bm", 3);
  CHECK(flat2.green.alphas.size() == 5);
  REQUIRE(flat3.green.alphas.size() == 6);
  CHECK(flat3.green.alphas.back() ==
        doctest::Approx(flat2.green.alphas.back() / 4.0).epsilon(1e-15));

  // The confining variant has no dedicated plan row: classification only.
  auto conf = scenario_defaults("gradient-drift", 2, "confining");
  CHECK(conf.tasks == std::vector<std::string>{"classify"});
}

TEST_CASE("the run-all plan covers ten scenario/dimension rows") {
  auto plan = run_all_plan();
  REQUIRE(plan.size() == 10);
  CHECK(plan.front().scenario == "flat-bm");
  CHECK(plan.front().dim == 2);
  CHECK(plan.back().scenario == "davies");
  for (const auto& pe : plan) {
    INFO(pe.scenario, " d=", pe.dim);
    REQUIRE_FALSE(pe.tasks.empty());
    CHECK(pe.tasks.front() == "classify");
    // Every planned row must build.
    auto f = make_scenario(pe.scenario, pe.dim, pe.variant);
    CHECK(f.d == pe.dim);
    // And its tasks must come from the known vocabulary.
    for (const auto& t : pe.tasks)
      CHECK((t == "classify" || t == "semigroup-probe" || t == "green-probe" ||
             t == "simulate" || t == "occupation"));
  }
}

TEST_CASE("dual pairing: the antisymmetric chain at scale -1 is the dual field") {
  // Flipping C realizes the dual operator; rho, A and the flags must agree.
  auto f = bump_antisymmetric_scaled(3, 1.0);
  auto fd = bump_antisymmetric_scaled(3, -1.0);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> g(-6.0, 6.0);
  for (int t = 0; t < 100; ++t) {
    double x[3] = {g(rng), g(rng), g(rng)};
    double c[9], cd[9];
    eval_C(f, x, c);
    eval_C(fd, x, cd);
    for (int i = 0; i < 9; ++i) CHECK(c[i] == -cd[i]);
  }
  CHECK(f.a_identity == fd.a_identity);
  CHECK(f.mu_lebesgue == fd.mu_lebesgue);
}

}  // TEST_SUITE
