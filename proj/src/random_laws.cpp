#include "mnar/random_laws.hpp"

#include <cmath>

#include "mnar/rng.hpp"

namespace mnar {

namespace {

double bounded(SplitMix64& rng, double floor) {
  return floor + (1.0 - 2.0 * floor) * rng.uniform01();
}

// Row with every entry >= floor; requires k * floor < 1.
std::vector<double> simplex_row(SplitMix64& rng, std::size_t k, double floor) {
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& v : w) {
    v = rng.uniform01() + 1e-9;
    total += v;
  }
  double slack = 1.0 - floor * static_cast<double>(k);
  require(slack > 0.0, Errc::RangeViolation, "floor too large for support");
  for (auto& v : w) v = floor + slack * v / total;
  return w;
}

std::vector<std::string> int_labels(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(std::to_string(i));
  return out;
}

}  // namespace

PermutationLaw random_permutation_law(std::uint64_t seed, std::size_t x_levels,
                                      double floor) {
  SplitMix64 rng = substream(seed, 0);
  PermutationLaw m;
  m.y_support = {"0", "1"};
  m.x_support = int_labels(x_levels);
  m.p_y1 = simplex_row(rng, 2, floor);
  for (std::size_t y = 0; y < 2; ++y)
    m.p_x1_given_y1.push_back(simplex_row(rng, x_levels, floor));
  for (std::size_t x = 0; x < x_levels; ++x)
    m.p_r1_given_x1.push_back(bounded(rng, floor));
  for (std::size_t y = 0; y < 2; ++y) m.zeta.push_back(bounded(rng, floor));
  m.q0 = bounded(rng, floor);
  m.validate();
  return m;
}

std::pair<PermutationLaw, PermutationLaw> random_permutation_pair(
    std::uint64_t seed, std::size_t x_levels, double floor) {
  return {random_permutation_law(derive_seed(seed, 1), x_levels, floor),
          random_permutation_law(derive_seed(seed, 2), x_levels, floor)};
}

namespace {

double logit_shift(double p, double shift) {
  double odds = p / (1.0 - p) * std::exp(shift);
  return odds / (1.0 + odds);
}

}  // namespace

PermutationLaw jitter_law(const PermutationLaw& base, std::uint64_t seed,
                          double scale) {
  SplitMix64 rng = substream(seed, 3);
  auto shift = [&]() { return scale * (2.0 * rng.uniform01() - 1.0); };
  PermutationLaw m = base;
  require(m.y_support.size() == 2, Errc::SupportMismatch,
          "jitter_law expects a binary outcome");
  m.p_y1[1] = logit_shift(m.p_y1[1], shift());
  m.p_y1[0] = 1.0 - m.p_y1[1];
  for (auto& row : m.p_x1_given_y1) {
    // Shift each entry on the odds scale, then renormalize.
    double total = 0.0;
    for (auto& v : row) {
      v = logit_shift(v, shift());
      total += v;
    }
    for (auto& v : row) v /= total;
  }
  for (auto& v : m.p_r1_given_x1) v = logit_shift(v, shift());
  for (auto& v : m.zeta) v = logit_shift(v, shift());
  m.q0 = logit_shift(m.q0, shift());
  m.validate();
  return m;
}

ExposureLaw random_exposure_law(std::uint64_t seed, std::size_t x_levels,
                                double floor) {
  SplitMix64 rng = substream(seed, 0);
  auto xs = int_labels(x_levels);
  const std::vector<std::string> binary = {"0", "1"};

  ConditionalFactor x_factor{"X", xs, {}, simplex_row(rng, x_levels, floor)};
  ConditionalFactor a1_factor{"A1", binary, {"X"}, {}};
  for (std::size_t x = 0; x < x_levels; ++x) {
    auto row = simplex_row(rng, 2, floor);
    a1_factor.probs.insert(a1_factor.probs.end(), row.begin(), row.end());
  }
  ConditionalFactor y_factor{"Y", binary, {"X", "A1"}, {}};
  for (std::size_t x = 0; x < x_levels; ++x)
    for (std::size_t a = 0; a < 2; ++a) {
      auto row = simplex_row(rng, 2, floor);
      y_factor.probs.insert(y_factor.probs.end(), row.begin(), row.end());
    }
  ConditionalFactor r_factor{"R", binary, {"X", "Y"}, {}};
  for (std::size_t x = 0; x < x_levels; ++x)
    for (std::size_t y = 0; y < 2; ++y) {
      double p = bounded(rng, floor);
      r_factor.probs.push_back(1.0 - p);
      r_factor.probs.push_back(p);
    }
  return make_exposure_law(x_factor, a1_factor, y_factor, r_factor);
}

}  // namespace mnar
