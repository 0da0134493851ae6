#ifndef MNAR_EXPANSION_HPP
#define MNAR_EXPANSION_HPP

#include <optional>
#include <vector>

#include "mnar/nuisance.hpp"
#include "mnar/tabular.hpp"

namespace mnar {

// Machine verification of the expansion
//   theta(Pbar) - theta(P) = \int phi(o; Pbar) d(Pbar - P)(o) + R(Pbar; P)
// with both the influence integral and the explicit remainder evaluated as
// exact finite sums over the shared observed support.

// The explicit remainder for the general outcome. Terms carry the leading
// 1/Pbar[R1=0,R2=1] factor; every expectation is under P.
struct GeneralRemainder {
  double strata_term = 0.0;  // {1 - p01/pbar01} {theta_bar - theta}
  double term1 = 0.0;        // (m_bar - m) against the gamma/alpha mixture
  double term2 = 0.0;        // -(m_bar - m)(1/zeta_bar - 1/zeta) piece
  double term3 = 0.0;        // -(1/zeta_bar - 1/zeta)(delta_bar - delta)
  double term4 = 0.0;        // (y - m)(1/zeta_bar - 1/zeta)(weight shift)
  double total() const { return strata_term + term1 + term2 + term3 + term4; }
};

// Binary-outcome remainder pieces that are directly computable. The
// mean-value second-order contribution is isolated as s2_residual rather
// than evaluated, and the scan certifies it decays quadratically.
struct BinaryRemainderPieces {
  double xi_varpi_term = 0.0;
  double strata_mix_term = 0.0;
  double theta_shift_term = 0.0;
  double s2_residual = 0.0;
};

struct ExpansionReport {
  double theta_p = 0.0;
  double theta_pbar = 0.0;
  double if_integral = 0.0;
  // Difference minus influence integral; exact by definition.
  double remainder_identity = 0.0;
  // Explicit display, when fully computable (general form only).
  std::optional<double> remainder_formula;
  std::optional<double> identity_residual;  // |formula - identity|
  std::optional<GeneralRemainder> general;
  std::optional<BinaryRemainderPieces> binary_pieces;
};

ExpansionReport expansion_check(const TabularLaw& p, const TabularLaw& pbar);

// The explicit display evaluated under P with caller-supplied nuisance
// sets. This is the building block behind expansion_check, exposed so a
// deliberately perturbed set can be probed term by term.
GeneralRemainder general_remainder_terms(const TabularLaw& p,
                                         const NuisanceSet& unbarred,
                                         const NuisanceSet& barred,
                                         double theta_p, double theta_pbar);

// Binary outcome with the odds ratio treated as known and shared.
ExpansionReport expansion_check_binary(const TabularLaw& p,
                                       const TabularLaw& pbar, double rho);

// \int phi(o; P) dP(o); zero for every valid coarse law.
double influence_mean_general(const TabularLaw& p);
double influence_mean_binary(const TabularLaw& p, double rho);

struct DecayReport {
  std::vector<double> epsilons;
  std::vector<double> remainders;
  // remainders[i+1]/remainders[i]; empty when every remainder is zero,
  // NaN entries where an individual base is zero.
  std::vector<double> decay_ratios;
  std::vector<double> if_integrals;
  // Successive ratios of if_integral(eps)/eps across the halvings.
  std::vector<double> if_over_eps_ratios;
};

// Remainder of expansion_check(p, mix(p, pbar, eps)) along a halving
// epsilon path; quadratic decay gives ratios near 1/4.
DecayReport second_order_scan(const TabularLaw& p, const TabularLaw& pbar,
                              const std::vector<double>& epsilons);

// Same scan on the binary form's s2_residual.
DecayReport second_order_scan_binary(const TabularLaw& p,
                                     const TabularLaw& pbar, double rho,
                                     const std::vector<double>& epsilons);

}  // namespace mnar

#endif  // MNAR_EXPANSION_HPP
