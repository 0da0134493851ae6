#include <doctest.h>

#include <cmath>

#include "mnar/identify.hpp"
#include "mnar/perm_model.hpp"
#include "mnar/random_laws.hpp"

#include "fixtures.hpp"

using namespace mnar;

TEST_CASE("theta and psi match the enumeration oracle on the reference law") {
  TabularLaw obs = observed_law(fixtures::w1());
  CHECK(theta_prop1(obs) == doctest::Approx(0.44).epsilon(1e-12));
  CHECK(psi_prop1(obs) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("functional equals oracle across random laws") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    PermutationLaw m = random_permutation_law(seed, 2 + seed % 3);
    TabularLaw obs = observed_law(m);
    CHECK(std::abs(theta_prop1(obs) - true_theta(m)) <= 1e-10);
    CHECK(std::abs(psi_prop1(obs) - true_psi(m)) <= 1e-10);
  }
}

TEST_CASE("identified full law matches the generating joint") {
  PermutationLaw m = fixtures::w1();
  TabularLaw obs = observed_law(m);
  TabularLaw ident = identified_full_law(obs);
  TabularLaw truth = marginal(full_law(m), {"Y1", "X1"});
  REQUIRE(ident.n_cells() == truth.n_cells());
  double total = 0.0;
  for (std::size_t c = 0; c < ident.n_cells(); ++c) {
    CHECK(std::abs(ident.prob_cell(c) - truth.prob_cell(c)) <= 1e-12);
    total += ident.prob_cell(c);
  }
  CHECK(std::abs(total - 1.0) <= 1e-12);
}

TEST_CASE("identified density degenerates to the complete-data joint") {
  PermutationLaw m = fixtures::no_missingness();
  TabularLaw obs = observed_law(m);
  TabularLaw truth = marginal(full_law(m), {"Y1", "X1"});
  for (const char* y : {"0", "1"})
    for (const char* x : {"0", "1"}) {
      double expected = event_prob(truth, {{"Y1", y}, {"X1", x}});
      CHECK(full_law_density(obs, x, y) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("mcar collapse: theta reduces to the complete-case regression") {
  PermutationLaw m = fixtures::mcar_like();
  TabularLaw obs = observed_law(m);
  // zeta constant and X independent of everything, so theta is just
  // E(Y | R1=1) = P(Y1=1) here (R1 does not depend on Y1 either).
  CHECK(theta_prop1(obs) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(psi_prop1(obs) == doctest::Approx(0.6).epsilon(1e-12));

  // rho = 1 when zeta is constant; theta equals the standardized mu.
  CHECK(rho_of(obs) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binary rewriting agrees with the general form") {
  TabularLaw obs = observed_law(fixtures::w1());
  // rho = zeta(1)/zeta(0): the second-stage response reweights the odds.
  CHECK(rho_of(obs) == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(theta_binary(obs) == doctest::Approx(0.44).epsilon(1e-12));
  CHECK(std::abs(theta_binary(obs) - theta_prop1(obs)) <= 1e-12);

  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    PermutationLaw m = random_permutation_law(seed, 2 + seed % 3);
    TabularLaw o = observed_law(m);
    CHECK(std::abs(theta_binary(o) - theta_prop1(o)) <= 1e-10);
  }
}

TEST_CASE("constant zeta collapses theta to the standardized regression") {
  // zeta flat in y makes rho = 1, so theta averages mu(x) over the
  // R1=0, R2=1 stratum even when X is informative.
  PermutationLaw m = fixtures::w1();
  m.zeta = {0.6, 0.6};
  TabularLaw obs = observed_law(m);
  CHECK(rho_of(obs) == doctest::Approx(1.0).epsilon(1e-12));

  double p01 = event_prob(obs, {{"R1", "0"}, {"R2", "1"}});
  double standardized = 0.0;
  for (const char* x : {"0", "1"}) {
    double w = event_prob(obs, {{"R1", "0"}, {"R2", "1"}, {"X", x}}) / p01;
    double p1 = event_prob(obs, {{"R1", "1"}, {"R2", "1"}, {"X", x}, {"Y", "1"}});
    double pall = event_prob(obs, {{"R1", "1"}, {"R2", "1"}, {"X", x}});
    standardized += w * (p1 / pall);
  }
  CHECK(theta_binary(obs) == doctest::Approx(standardized).epsilon(1e-12));
  CHECK(std::abs(theta_binary(obs) - theta_prop1(obs)) <= 1e-12);
}

TEST_CASE("density ratio form") {
  TabularLaw obs = observed_law(fixtures::w1());
  double odds11 = rho_of(obs) * (0.56 / 0.44);  // odds(Y=1 | R1=R2=1)

  SUBCASE("xi = lambda * odds(Y=1 | R1=R2=1) cellwise") {
    for (const char* x : {"0", "1"}) {
      auto dr = density_ratio_form(obs, x);
      CHECK(std::abs(xi_at(obs, x) - dr.lambda * odds11) <= 1e-12);
    }
  }
  SUBCASE("posterior probability standardizes to theta") {
    double p01 = event_prob(obs, {{"R1", "0"}, {"R2", "1"}});
    double total = 0.0;
    for (const char* x : {"0", "1"}) {
      double w =
          event_prob(obs, {{"R1", "0"}, {"R2", "1"}, {"X", x}}) / p01;
      total += w * density_ratio_form(obs, x).posterior_prob;
    }
    CHECK(std::abs(total - theta_binary(obs)) <= 1e-12);
  }
  SUBCASE("independence makes lambda flat") {
    PermutationLaw m = fixtures::mcar_like();
    TabularLaw o = observed_law(m);
    for (const char* x : {"0", "1"}) {
      auto dr = density_ratio_form(o, x);
      CHECK(dr.lambda == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(dr.posterior_prob == doctest::Approx(0.6).epsilon(1e-12));
    }
  }
}

TEST_CASE("errors from the functionals") {
  TabularLaw clean = observed_law(fixtures::no_missingness());
  CHECK_THROWS_WITH_AS(theta_prop1(clean),
                       doctest::Contains("ZeroProbabilityEvent"), Error);
  // psi still works: it is the complete-case mean.
  CHECK(psi_prop1(clean) == doctest::Approx(0.5).epsilon(1e-12));

  PermutationLaw m = fixtures::w1();
  m.y_support = {"0", "2"};
  CHECK_THROWS_WITH_AS(theta_binary(observed_law(m)),
                       doctest::Contains("NotBinaryOutcome"), Error);
}

TEST_CASE("exposure mean equals the structural oracle") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    ExposureLaw el = random_exposure_law(seed, 2 + seed % 2);
    const auto& xs = el.full.variables()[el.full.var_index("X")].support;
    for (const auto& a : {"0", "1"})
      for (const auto& x : xs) {
        // Oracle: E(Y | A1=a, X=x) from the generating joint, which is the
        // intervention mean under no unmeasured confounding.
        TabularLaw slice = condition(el.full, {{"X", x}, {"A1", a}});
        double oracle =
            expectation(slice, [](const Cell& c) { return c.numeric("Y"); });
        CHECK(std::abs(exposure_mean(el, a, x) - oracle) <= 1e-10);
      }
  }
}

TEST_CASE("exposure mean collapses when the weight is flat in y") {
  ConditionalFactor xf{"X", {"0", "1"}, {}, {0.5, 0.5}};
  ConditionalFactor af{"A1", {"0", "1"}, {"X"}, {0.3, 0.7, 0.6, 0.4}};
  // Outcome ignores the exposure, so the propensity weight is flat in y
  // and the ratio reduces to E(Y | X=x).
  ConditionalFactor yf{"Y", {"0", "1"}, {"X", "A1"},
                       {0.8, 0.2, 0.8, 0.2, 0.4, 0.6, 0.4, 0.6}};
  ConditionalFactor rf{"R", {"0", "1"}, {"X", "Y"},
                       {0.2, 0.8, 0.2, 0.8, 0.3, 0.7, 0.3, 0.7}};
  ExposureLaw el = make_exposure_law(xf, af, yf, rf);
  for (const char* x : {"0", "1"}) {
    TabularLaw slice = condition(el.observed, {{"X", x}});
    double ey =
        expectation(slice, [](const Cell& c) { return c.numeric("Y"); });
    for (const char* a : {"0", "1"})
      CHECK(exposure_mean(el, a, x) == doctest::Approx(ey).epsilon(1e-12));
  }
}

TEST_CASE("exposure positivity errors") {
  ConditionalFactor xf{"X", {"0"}, {}, {1.0}};
  ConditionalFactor af{"A1", {"0", "1"}, {"X"}, {1.0, 0.0}};  // arm 1 never
  ConditionalFactor yf{"Y", {"0", "1"}, {"X", "A1"},
                       {0.5, 0.5, 0.5, 0.5}};
  ConditionalFactor rf{"R", {"0", "1"}, {"X", "Y"}, {0.2, 0.8, 0.2, 0.8}};
  ExposureLaw el = make_exposure_law(xf, af, yf, rf);
  CHECK_THROWS_WITH_AS(exposure_mean(el, "1", "0"),
                       doctest::Contains("PositivityViolation"), Error);
}
