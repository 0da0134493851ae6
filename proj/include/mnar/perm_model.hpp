#ifndef MNAR_PERM_MODEL_HPP
#define MNAR_PERM_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mnar/tabular.hpp"

namespace mnar {

// Structural parameterization of the two-stage permutation missingness
// model over (Y1, X1, R1, R2):
//
//   Y1 ~ p_y1,  X1 | Y1 ~ p_x1_given_y1,  R1 | X1 ~ p_r1_given_x1,
//   R2 | R1=1, Y1=y ~ Bernoulli(zeta(y)),  R2 | R1=0 ~ Bernoulli(q0).
//
// Y is observed iff R1=1, X is observed iff R2=1. Y labels must be
// numeric; X labels are arbitrary. zeta and q0 must be strictly positive.
struct PermutationLaw {
  std::vector<std::string> y_support;
  std::vector<std::string> x_support;
  std::vector<double> p_y1;                        // indexed by y
  std::vector<std::vector<double>> p_x1_given_y1;  // [y][x]
  std::vector<double> p_r1_given_x1;               // P(R1=1 | X1=x)
  std::vector<double> zeta;                        // P(R2=1 | R1=1, Y=y)
  double q0 = 0.0;                                 // P(R2=1 | R1=0)

  void validate() const;
};

// Joint law of (Y1, X1, R1, R2).
TabularLaw full_law(const PermutationLaw& m);

// Joint law of (R1, R2, Y, X) with "?" on the unobserved branches of Y
// and X; a pure aggregation of full_law cells.
TabularLaw observed_law(const PermutationLaw& m);

struct ObservedRecord {
  int r1 = 0;
  int r2 = 0;
  std::string y;  // "?" iff r1 == 0
  std::string x;  // "?" iff r2 == 0
};

struct Dataset {
  std::vector<ObservedRecord> records;
  std::uint64_t seed = 0;
  std::string generator;  // RNG identifier the draws came from

  std::size_t size() const { return records.size(); }
};

// n i.i.d. draws from observed_law(m). Record i consumes a substream
// derived from (seed, i), so output is independent of batching.
Dataset sample(const PermutationLaw& m, std::size_t n, std::uint64_t seed);

// Oracle values by direct summation over full_law. true_theta conditions
// on R1 = 0 and fails with ZeroProbabilityEvent if that stratum is empty.
double true_psi(const PermutationLaw& m);
double true_theta(const PermutationLaw& m);

// JSON mirrors the five factors:
// {"y1_support":[..],"x1_support":[..],"p_y1":[..],
//  "p_x1_given_y1":[[..],..],"p_r1_given_x1":[..],"zeta":[..],"q0":..}
std::string permutation_law_to_json(const PermutationLaw& m);
PermutationLaw permutation_law_from_json(const std::string& text);

// CSV with header r1,r2,y,x, "?" for the missing token, LF line endings.
void write_dataset_csv(const Dataset& d, std::ostream& out);
Dataset read_dataset_csv(std::istream& in);

}  // namespace mnar

#endif  // MNAR_PERM_MODEL_HPP
