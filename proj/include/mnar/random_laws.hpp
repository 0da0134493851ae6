#ifndef MNAR_RANDOM_LAWS_HPP
#define MNAR_RANDOM_LAWS_HPP

#include <cstdint>
#include <utility>

#include "mnar/identify.hpp"
#include "mnar/perm_model.hpp"

namespace mnar {

// Seeded generators for well-conditioned laws: every probability entry is
// kept at least `floor` away from the degenerate boundary so that all
// functional evaluations stay numerically comparable to the exact oracle.

PermutationLaw random_permutation_law(std::uint64_t seed,
                                      std::size_t x_levels,
                                      double floor = 0.05);

// Two independent laws over the same supports, for expansion checks.
std::pair<PermutationLaw, PermutationLaw> random_permutation_pair(
    std::uint64_t seed, std::size_t x_levels, double floor = 0.05);

// A nearby law: every probability parameter of `base` is shifted on the
// logit scale by scale * U(-1, 1). Used for expansion scans, where the
// perturbation must be moderate for the asymptotic decay rates to show at
// the scanned epsilon range.
PermutationLaw jitter_law(const PermutationLaw& base, std::uint64_t seed,
                          double scale);

// Point-exposure law with binary exposure and outcome and x_levels
// covariate levels.
ExposureLaw random_exposure_law(std::uint64_t seed, std::size_t x_levels,
                                double floor = 0.05);

}  // namespace mnar

#endif  // MNAR_RANDOM_LAWS_HPP
