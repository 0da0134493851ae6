#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "mnar/perm_model.hpp"
#include "mnar/random_laws.hpp"
#include "mnar/tabular.hpp"

#include "fixtures.hpp"

using namespace mnar;

TEST_CASE("reference law joint cells by hand multiplication") {
  TabularLaw law = full_law(fixtures::w1());
  REQUIRE(law.n_cells() == 16);

  // Two literal cells, multiplied out by hand:
  //   P(Y1=1, X1=1, R1=1, R2=1) = 0.5 * 0.8 * 0.6 * 0.5  = 0.12
  //   P(Y1=0, X1=0, R1=0, R2=1) = 0.5 * 0.8 * 0.6 * 0.7  = 0.168
  auto cell = [&](const char* y, const char* x, const char* r1,
                  const char* r2) {
    std::vector<std::size_t> idx = {
        law.label_index(0, y), law.label_index(1, x), law.label_index(2, r1),
        law.label_index(3, r2)};
    return law.prob(idx);
  };
  CHECK(cell("1", "1", "1", "1") == doctest::Approx(0.12).epsilon(1e-14));
  CHECK(cell("0", "0", "0", "1") == doctest::Approx(0.168).epsilon(1e-14));

  // Every cell against an independent multiplication loop.
  PermutationLaw m = fixtures::w1();
  for (std::size_t y = 0; y < 2; ++y)
    for (std::size_t x = 0; x < 2; ++x)
      for (int r1 = 0; r1 <= 1; ++r1)
        for (int r2 = 0; r2 <= 1; ++r2) {
          double expected = m.p_y1[y] * m.p_x1_given_y1[y][x];
          expected *= r1 ? m.p_r1_given_x1[x] : 1 - m.p_r1_given_x1[x];
          double p2 = r1 ? m.zeta[y] : m.q0;
          expected *= r2 ? p2 : 1 - p2;
          std::vector<std::size_t> idx = {y, x, static_cast<std::size_t>(r1),
                                          static_cast<std::size_t>(r2)};
          CHECK(law.prob(idx) == doctest::Approx(expected).epsilon(1e-14));
        }
}

TEST_CASE("reference law marginals") {
  TabularLaw law = full_law(fixtures::w1());
  CHECK(event_prob(law, {{"R1", "1"}}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(expectation(law, [](const Cell& c) { return c.numeric("Y1"); }) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("degenerate law with no missingness") {
  TabularLaw law = full_law(fixtures::no_missingness());
  CHECK(event_prob(law, {{"R1", "1"}, {"R2", "1"}}) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_WITH_AS(true_theta(fixtures::no_missingness()),
                       doctest::Contains("ZeroProbabilityEvent"), Error);
}

TEST_CASE("factorization independences hold exactly") {
  TabularLaw law = full_law(fixtures::w1());
  CHECK(check_independence(law, {"R1"}, {"Y1"}, {"X1"}, 1e-12));
  TabularLaw slice = condition(law, {{"R1", "1"}});
  CHECK(check_independence(slice, {"R2"}, {"X1"}, {"Y1"}, 1e-12));
}

TEST_CASE("observed law aggregates the full law") {
  PermutationLaw m = fixtures::w1();
  TabularLaw obs = observed_law(m);
  CHECK(event_prob(obs, {{"R1", "0"}, {"Y", "?"}}) ==
        doctest::Approx(0.5).epsilon(1e-14));
  double total = 0.0;
  for (std::size_t c = 0; c < obs.n_cells(); ++c) total += obs.prob_cell(c);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

  SUBCASE("coarsening and marginalization commute") {
    TabularLaw full = full_law(m);
    // P(R1=1, R2=1, Y=y, X=x) must equal the full-law cell P(y, x, 1, 1).
    for (const char* y : {"0", "1"})
      for (const char* x : {"0", "1"}) {
        double lhs = event_prob(
            obs, {{"R1", "1"}, {"R2", "1"}, {"Y", y}, {"X", x}});
        double rhs = event_prob(
            full, {{"Y1", y}, {"X1", x}, {"R1", "1"}, {"R2", "1"}});
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
      }
    // Mass with R1=0, R2=1 keeps only the X coordinate.
    for (const char* x : {"0", "1"}) {
      double lhs =
          event_prob(obs, {{"R1", "0"}, {"R2", "1"}, {"Y", "?"}, {"X", x}});
      double rhs =
          event_prob(full, {{"X1", x}, {"R1", "0"}, {"R2", "1"}});
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
    }
  }
  SUBCASE("no-missingness law has zero mass on missing tokens") {
    TabularLaw clean = observed_law(fixtures::no_missingness());
    CHECK(event_prob(clean, {{"Y", "?"}}) == 0.0);
    CHECK(event_prob(clean, {{"X", "?"}}) == 0.0);
  }
}

TEST_CASE("oracle values for the reference law") {
  CHECK(true_psi(fixtures::w1()) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(true_theta(fixtures::w1()) == doctest::Approx(0.44).epsilon(1e-14));
}

TEST_CASE("sampling is reproducible and respects the record pattern") {
  PermutationLaw m = fixtures::w1();
  Dataset a = sample(m, 500, 42);
  Dataset b = sample(m, 500, 42);
  REQUIRE(a.size() == 500);
  CHECK(a.generator == b.generator);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].r1 == b.records[i].r1);
    CHECK(a.records[i].r2 == b.records[i].r2);
    CHECK(a.records[i].y == b.records[i].y);
    CHECK(a.records[i].x == b.records[i].x);
  }
  for (const auto& rec : a.records) {
    CHECK((rec.y == missing_token()) == (rec.r1 == 0));
    CHECK((rec.x == missing_token()) == (rec.r2 == 0));
  }
  Dataset c = sample(m, 500, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < c.size(); ++i)
    any_diff = any_diff || c.records[i].y != a.records[i].y ||
               c.records[i].r1 != a.records[i].r1;
  CHECK(any_diff);
}

TEST_CASE("prefix stability: record i depends only on (seed, i)") {
  PermutationLaw m = fixtures::w1();
  Dataset small = sample(m, 100, 7);
  Dataset big = sample(m, 1000, 7);
  for (std::size_t i = 0; i < small.size(); ++i) {
    CHECK(small.records[i].r1 == big.records[i].r1);
    CHECK(small.records[i].y == big.records[i].y);
    CHECK(small.records[i].x == big.records[i].x);
  }
}

TEST_CASE("empirical frequencies concentrate around the observed law") {
  PermutationLaw m = fixtures::w1();
  const std::size_t n = 100000;
  Dataset d = sample(m, n, 2024);
  std::map<std::string, double> freq;
  double r1_rate = 0.0;
  for (const auto& rec : d.records) {
    freq[std::to_string(rec.r1) + "," + std::to_string(rec.r2) + "," + rec.y +
         "," + rec.x] += 1.0 / static_cast<double>(n);
    r1_rate += rec.r1 / static_cast<double>(n);
  }
  CHECK(std::abs(r1_rate - 0.5) < 0.01);

  TabularLaw obs = observed_law(m);
  const auto& vars = obs.variables();
  double max_gap = 0.0;
  for (std::size_t c = 0; c < obs.n_cells(); ++c) {
    auto idx = obs.indices_of(c);
    std::string key = vars[0].support[idx[0]] + "," + vars[1].support[idx[1]] +
                      "," + vars[2].support[idx[2]] + "," +
                      vars[3].support[idx[3]];
    double emp = freq.count(key) ? freq[key] : 0.0;
    max_gap = std::max(max_gap, std::abs(emp - obs.prob_cell(c)));
  }
  CHECK(max_gap < 0.01);
}

TEST_CASE("law JSON and dataset CSV round trips") {
  PermutationLaw m = fixtures::w1();
  PermutationLaw back = permutation_law_from_json(permutation_law_to_json(m));
  CHECK(back.q0 == m.q0);
  CHECK(back.zeta == m.zeta);
  CHECK(back.p_x1_given_y1 == m.p_x1_given_y1);

  Dataset d = sample(m, 50, 5);
  std::ostringstream out;
  write_dataset_csv(d, out);
  std::istringstream in(out.str());
  Dataset rd = read_dataset_csv(in);
  REQUIRE(rd.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(rd.records[i].r1 == d.records[i].r1);
    CHECK(rd.records[i].y == d.records[i].y);
  }
  std::istringstream bad("r1,r2,y,x\n1,1,?,0\n");
  CHECK_THROWS_WITH_AS(read_dataset_csv(bad),
                       doctest::Contains("y must be ? exactly when r1=0"),
                       Error);
}

TEST_CASE("law validation rejects bad parameters") {
  PermutationLaw m = fixtures::w1();
  m.zeta = {0.8, 0.0};
  CHECK_THROWS_WITH_AS(full_law(m), doctest::Contains("PositivityViolation"),
                       Error);
  m = fixtures::w1();
  m.p_y1 = {0.7, 0.7};
  CHECK_THROWS_WITH_AS(full_law(m), doctest::Contains("UnnormalizedFactor"),
                       Error);
  m = fixtures::w1();
  m.y_support = {"a", "b"};
  CHECK_THROWS_WITH_AS(full_law(m), doctest::Contains("NonNumericLabel"),
                       Error);
}

TEST_CASE("random laws respect the probability floor") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PermutationLaw m = random_permutation_law(seed, 2 + seed % 3);
    for (double p : m.p_y1) CHECK(p >= 0.05);
    for (const auto& row : m.p_x1_given_y1)
      for (double p : row) CHECK(p >= 0.05);
    for (double p : m.p_r1_given_x1) {
      CHECK(p >= 0.05);
      CHECK(p <= 0.95);
    }
    for (double z : m.zeta) CHECK(z >= 0.05);
    CHECK(m.q0 >= 0.05);
  }
}
