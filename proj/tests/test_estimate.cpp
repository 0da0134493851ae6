#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mnar/estimate.hpp"
#include "mnar/identify.hpp"
#include "mnar/random_laws.hpp"

#include "fixtures.hpp"

using namespace mnar;

namespace {

Dataset exact_frequency_dataset(const TabularLaw& obs, std::size_t scale) {
  Dataset d;
  d.generator = "exact-frequency";
  const auto& vars = obs.variables();
  for (std::size_t c = 0; c < obs.n_cells(); ++c) {
    auto idx = obs.indices_of(c);
    auto copies = static_cast<long long>(
        std::llround(obs.prob_cell(c) * static_cast<double>(scale)));
    ObservedRecord rec;
    rec.r1 = vars[0].support[idx[0]] == "1" ? 1 : 0;
    rec.r2 = vars[1].support[idx[1]] == "1" ? 1 : 0;
    rec.y = vars[2].support[idx[2]];
    rec.x = vars[3].support[idx[3]];
    for (long long k = 0; k < copies; ++k) d.records.push_back(rec);
  }
  return d;
}

}  // namespace

TEST_CASE("plug-in on exact frequencies recovers the functional") {
  TabularLaw obs = observed_law(fixtures::w1());
  Dataset d = exact_frequency_dataset(obs, 100000);
  NuisanceSet ns = nuisances_from_law(obs);
  Estimate e = plugin_theta(ns, d);
  CHECK(e.value == doctest::Approx(0.44).epsilon(1e-12));
  CHECK_FALSE(e.standard_error.has_value());
  CHECK(e.method == Method::plugin);
}

TEST_CASE("one-step equals plug-in when the correction has mean zero") {
  TabularLaw obs = observed_law(fixtures::w1());
  Dataset d = exact_frequency_dataset(obs, 100000);
  NuisanceSet ns = nuisances_from_law(obs);
  Estimate pl = plugin_theta(ns, d);
  Estimate os = onestep_theta(ns, d);
  CHECK(std::abs(os.value - pl.value) <= 1e-10);
  CHECK(os.standard_error.has_value());
  CHECK(*os.ci_low <= os.value);
  CHECK(os.value <= *os.ci_high);

  SUBCASE("binary form agrees on exact inputs with the true odds ratio") {
    Estimate ob = onestep_theta_binary(ns, d, RhoSpec::known(0.625));
    CHECK(std::abs(ob.value - 0.44) <= 1e-10);
    CHECK(ob.diagnostics.rho_mode.rfind("known:", 0) == 0);
    Estimate oe = onestep_theta_binary(ns, d, RhoSpec::estimated());
    CHECK(std::abs(oe.value - 0.44) <= 1e-10);
    CHECK(oe.diagnostics.rho_mode == "estimate");
    REQUIRE(!oe.diagnostics.caveats.empty());
  }
  SUBCASE("empirical influence mean is zero at exact inputs") {
    auto hist = cell_histogram(d);
    double mean = 0.0;
    for (const auto& [key, count] : hist)
      mean += count * os.if_cell_values.at(key);
    mean /= static_cast<double>(d.size());
    CHECK(std::abs(mean) <= 1e-10);
  }
}

TEST_CASE("one-step is plug-in plus the correction mean by construction") {
  Dataset d = sample(fixtures::w1(), 3000, 21);
  NuisanceSet ns = fit_nuisances(d, {});
  Estimate pl = plugin_theta(ns, d);
  Estimate os = onestep_theta(ns, d);
  auto hist = cell_histogram(d);
  double corr = 0.0;
  for (const auto& [key, count] : hist)
    corr += count * os.if_cell_values.at(key);
  corr /= static_cast<double>(d.size());
  CHECK(os.value == doctest::Approx(pl.value + corr).epsilon(1e-13));
}

TEST_CASE("estimators are invariant to record order") {
  Dataset d = sample(fixtures::w1(), 2000, 77);
  Dataset shuffled = d;
  std::mt19937_64 g(123);
  std::shuffle(shuffled.records.begin(), shuffled.records.end(), g);
  NuisanceSet ns1 = fit_nuisances(d, {});
  NuisanceSet ns2 = fit_nuisances(shuffled, {});
  CHECK(onestep_theta(ns1, d).value == onestep_theta(ns2, shuffled).value);
  CHECK(*onestep_theta(ns1, d).standard_error ==
        *onestep_theta(ns2, shuffled).standard_error);
  CHECK(plugin_theta(ns1, d).value == plugin_theta(ns2, shuffled).value);
  CHECK(onestep_theta_binary(ns1, d, RhoSpec::known(0.625)).value ==
        onestep_theta_binary(ns2, shuffled, RhoSpec::known(0.625)).value);
}

TEST_CASE("empty stratum errors") {
  Dataset d;
  d.generator = "manual";
  for (int i = 0; i < 20; ++i) d.records.push_back({1, 1, "1", "0"});
  for (int i = 0; i < 20; ++i) d.records.push_back({1, 1, "0", "0"});
  NuisanceSet ns = fit_nuisances(d, {});
  CHECK_THROWS_WITH_AS(plugin_theta(ns, d), doctest::Contains("EmptyStratum"),
                       Error);
  CHECK_THROWS_WITH_AS(onestep_theta(ns, d),
                       doctest::Contains("EmptyStratum"), Error);
}

TEST_CASE("psi estimate") {
  TabularLaw obs = observed_law(fixtures::w1());
  Dataset d = exact_frequency_dataset(obs, 100000);
  NuisanceSet ns = nuisances_from_law(obs);
  Estimate theta = onestep_theta(ns, d);
  Estimate psi = psi_estimate(d, theta);
  CHECK(psi.value == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(psi.standard_error.has_value());

  SUBCASE("no missing outcomes reduces to the complete-case mean") {
    Dataset full;
    full.generator = "manual";
    for (int i = 0; i < 30; ++i) full.records.push_back({1, 1, "1", "0"});
    for (int i = 0; i < 10; ++i) full.records.push_back({1, 1, "0", "1"});
    Estimate cc = psi_estimate(full, std::nullopt);
    CHECK(cc.value == doctest::Approx(0.75).epsilon(1e-14));
  }
  SUBCASE("theta is required when the sample has R1=0 records") {
    CHECK_THROWS_WITH_AS(psi_estimate(d, std::nullopt),
                         doctest::Contains("EmptyStratum"), Error);
  }
  SUBCASE("plug-in theta gives a psi value but no interval") {
    Estimate pl = plugin_theta(ns, d);
    Estimate psi_pl = psi_estimate(d, pl);
    CHECK(psi_pl.value == doctest::Approx(0.5).epsilon(1e-10));
    CHECK_FALSE(psi_pl.standard_error.has_value());
  }
}

TEST_CASE("cross-fitting") {
  Dataset d = sample(fixtures::w1(), 4000, 3);
  SUBCASE("deterministic given the seed") {
    Estimate a = crossfit(d, {5, 11, {}});
    Estimate b = crossfit(d, {5, 11, {}});
    CHECK(a.value == b.value);
    CHECK(*a.standard_error == *b.standard_error);
    CHECK(a.diagnostics.fold_seeds == b.diagnostics.fold_seeds);
    REQUIRE(a.diagnostics.fold_seeds.size() == 5);
  }
  SUBCASE("K=2 and K=5 both land near the truth") {
    double truth = true_theta(fixtures::w1());
    for (std::size_t k : {std::size_t{2}, std::size_t{5}}) {
      Estimate e = crossfit(d, {k, 11, {}});
      CHECK(std::abs(e.value - truth) <= 3.0 * *e.standard_error);
    }
  }
  SUBCASE("leave-one-out on a tiny sample still runs") {
    Dataset tiny = sample(fixtures::w1(), 40, 9);
    Estimate e = crossfit(tiny, {tiny.size(), 1, {}});
    CHECK(std::isfinite(e.value));
  }
  SUBCASE("fold validation") {
    CHECK_THROWS_WITH_AS(crossfit(d, {1, 0, {}}),
                         doctest::Contains("FoldTooSmall"), Error);
    CHECK_THROWS_WITH_AS(crossfit(d, {d.size() + 1, 0, {}}),
                         doctest::Contains("FoldTooSmall"), Error);
  }
}

TEST_CASE("monte carlo harness is reproducible") {
  McConfig cfg;
  cfg.n = 400;
  cfg.reps = 20;
  cfg.seed = 5;
  McResult a = monte_carlo(fixtures::w1(), cfg);
  McResult b = monte_carlo(fixtures::w1(), cfg);
  REQUIRE(a.reps.size() == 20);
  for (std::size_t r = 0; r < a.reps.size(); ++r)
    CHECK(a.reps[r].value == b.reps[r].value);
  CHECK(a.truth == doctest::Approx(0.44).epsilon(1e-12));
}

TEST_CASE("se sqrt-n scaling stabilizes") {
  // se * sqrt(n) should be roughly flat across n; ratios within [0.8, 1.25].
  std::vector<std::size_t> sizes = {1000, 4000, 16000};
  std::vector<double> scaled;
  for (std::size_t n : sizes) {
    McConfig cfg;
    cfg.n = n;
    cfg.reps = 30;
    cfg.seed = 17;
    McResult res = monte_carlo(fixtures::w1(), cfg);
    double mean_se = 0.0;
    for (const auto& r : res.reps) mean_se += *r.se;
    mean_se /= static_cast<double>(res.reps.size());
    scaled.push_back(mean_se * std::sqrt(static_cast<double>(n)));
  }
  for (std::size_t i = 0; i + 1 < scaled.size(); ++i) {
    double ratio = scaled[i + 1] / scaled[i];
    CHECK(ratio >= 0.8);
    CHECK(ratio <= 1.25);
  }
}

TEST_CASE("psi coverage at n=4000") {
  McConfig cfg;
  cfg.n = 4000;
  cfg.reps = 500;
  cfg.seed = 812;
  cfg.target = McTarget::psi;
  McResult res = monte_carlo(fixtures::w1(), cfg);
  CHECK(res.truth == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(res.coverage >= 0.92);
  CHECK(res.coverage <= 0.97);
}

TEST_CASE("binary and general one-step agree across replications") {
  // Same seeds, same datasets; the two estimators target the same value,
  // so their replication means differ by at most twice the combined
  // Monte Carlo standard error.
  McConfig cfg;
  cfg.n = 4000;
  cfg.reps = 500;
  cfg.seed = 271;
  cfg.method = Method::onestep_general;
  McResult general = monte_carlo(fixtures::w1(), cfg);
  cfg.method = Method::onestep_binary;
  cfg.rho = RhoSpec::known(0.625);
  McResult binary = monte_carlo(fixtures::w1(), cfg);
  double diff = std::abs(general.mean_bias - binary.mean_bias);
  double combined_se =
      std::sqrt(general.sd_value * general.sd_value +
                binary.sd_value * binary.sd_value) /
      std::sqrt(static_cast<double>(cfg.reps));
  CHECK(diff <= 2.0 * combined_se);
}

TEST_CASE("plug-in sensitivity is first order and cancelled by the correction") {
  // Bump the regression nuisances the plug-in averages over. The plug-in
  // moves linearly in the bump size while the influence-function
  // correction absorbs the movement to first order, so the one-step value
  // drifts quadratically.
  TabularLaw obs = observed_law(fixtures::w1());
  Dataset d = exact_frequency_dataset(obs, 100000);
  NuisanceSet ns = nuisances_from_law(obs);
  BumpSpec bumps{{{"alpha", 1.0, std::nullopt}, {"beta", -1.0, std::nullopt}}};
  double base_plugin = plugin_theta(ns, d).value;
  double base_onestep = onestep_theta(ns, d).value;

  std::vector<double> eps = {0.02, 0.01, 0.005};
  std::vector<double> plugin_move, onestep_move;
  for (double e : eps) {
    NuisanceSet bumped = perturb(ns, e, bumps);
    plugin_move.push_back(plugin_theta(bumped, d).value - base_plugin);
    onestep_move.push_back(onestep_theta(bumped, d).value - base_onestep);
  }
  for (std::size_t i = 0; i + 1 < eps.size(); ++i) {
    // Linear in eps: halving eps halves the plug-in movement.
    double ratio = plugin_move[i + 1] / plugin_move[i];
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
    // Quadratic in eps: the one-step drift shrinks by about four.
    double os_ratio = onestep_move[i + 1] / onestep_move[i];
    CHECK(os_ratio > 0.15);
    CHECK(os_ratio < 0.40);
  }
  // The correction term recovers the plug-in movement to first order.
  NuisanceSet bumped = perturb(ns, 0.01, bumps);
  Estimate os = onestep_theta(bumped, d);
  double correction = os.value - plugin_theta(bumped, d).value;
  CHECK(std::abs(plugin_move[1] + correction) <=
        0.2 * std::abs(plugin_move[1]));
}

TEST_CASE("perturbed plug-in moves first order, one-step stays closer") {
  // Small version of the bias experiment; the acceptance suite runs the
  // full 500-replication comparison.
  McConfig base;
  base.n = 4000;
  base.reps = 60;
  base.seed = 31;
  base.perturb_eps = std::pow(4000.0, -0.25);
  base.bumps = BumpSpec{{{"alpha", 1.0, std::nullopt},
                         {"beta", -1.0, std::nullopt},
                         {"zeta", 1.0, std::nullopt},
                         {"gamma", -1.0, std::nullopt}}};
  McConfig pl = base;
  pl.method = Method::plugin;
  McConfig os = base;
  os.method = Method::onestep_general;
  McResult rp = monte_carlo(fixtures::w1(), pl);
  McResult ro = monte_carlo(fixtures::w1(), os);
  CHECK(ro.median_abs_bias < rp.median_abs_bias);
}
