#ifndef MNAR_IDENTIFY_HPP
#define MNAR_IDENTIFY_HPP

#include <string>
#include <vector>

#include "mnar/tabular.hpp"

namespace mnar {

// Population identification functionals, evaluated exactly on a coarse
// law over (R1, R2, Y, X). theta is the mean of the underlying outcome in
// the R1=0 stratum; psi is its overall mean.

// Identified joint density of the underlying (Y1, X1) at one point,
// computed from the observed law alone.
double full_law_density(const TabularLaw& obs, const std::string& x,
                        const std::string& y);

// The whole identified joint as a law over (Y1, X1).
TabularLaw identified_full_law(const TabularLaw& obs);

// theta via the ratio-of-conditional-means form; exact summation.
double theta_prop1(const TabularLaw& obs);

// psi = P(R1=1) E(Y | R1=1) + P(R1=0) theta. When P(R1=0)=0 this
// degenerates to the complete-case mean.
double psi_prop1(const TabularLaw& obs);

// Selection odds ratio odds(Y=1 | R1=R2=1) / odds(Y=1 | R1=1).
double rho_of(const TabularLaw& obs);

// Binary-outcome rewriting: theta = E( xi(X) / (rho + xi(X)) | R1=0, R2=1 )
// with xi(x) = odds(Y=1 | X=x, R1=R2=1).
double theta_binary(const TabularLaw& obs);
double theta_binary_known_rho(const TabularLaw& obs, double rho);
double xi_at(const TabularLaw& obs, const std::string& x);

struct DensityRatio {
  double lambda;          // dP(x | R1=R2=1, Y=1) / dP(x | R1=R2=1, Y=0)
  double posterior_prob;  // odds(Y=1|R1=1)*lambda on the probability scale
};

// Likelihood-ratio form of xi; averaging posterior_prob over
// dP(x | R1=0, R2=1) reproduces theta_binary.
DensityRatio density_ratio_form(const TabularLaw& obs, const std::string& x);

// Point-exposure law with a partially missing exposure: full joint over
// (X, A1, Y, R) plus its coarsening over (X, R, A, Y) with A observed
// only when R=1.
struct ExposureLaw {
  TabularLaw full;
  TabularLaw observed;
};

// Build from the factorization X, A1|X, Y|X,A1, R|X,Y. The response
// probability must be positive on every (x, y) cell with mass.
ExposureLaw make_exposure_law(const ConditionalFactor& x_factor,
                              const ConditionalFactor& a1_factor,
                              const ConditionalFactor& y_factor,
                              const ConditionalFactor& r_factor);

// E(Y under an intervention fixing the exposure to `a` | X=x), evaluated
// from the observed component via the conditional-odds weighting
//   E(Y L_a(X,Y) | X=x) / E(L_a(X,Y) | X=x),  L_a(x,y)=P(A=a|x,y,R=1).
double exposure_mean(const ExposureLaw& el, const std::string& a,
                     const std::string& x);

}  // namespace mnar

#endif  // MNAR_IDENTIFY_HPP
