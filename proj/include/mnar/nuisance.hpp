#ifndef MNAR_NUISANCE_HPP
#define MNAR_NUISANCE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mnar/perm_model.hpp"
#include "mnar/tabular.hpp"

namespace mnar {

// The nuisance functions entering the influence functions, stored as total
// lookup tables over the observed supports. Lookups on unseen labels throw
// UnknownLabel rather than extrapolate.
//
//   zeta(y)  = P(R2=1 | R1=1, Y=y)
//   alpha(x) = E(1/zeta(Y) | R1=1, R2=1, X=x)
//   beta(x)  = E(Y/zeta(Y) | R1=1, R2=1, X=x)
//   gamma(x) = P(R1=1 | R2=1, X=x)
//   delta(y) = E( (1/alpha)((1-gamma)/gamma)(Y - beta/alpha) | R1=1,R2=1,Y=y )
//
// Binary-outcome extras (present iff both outcome values occur):
//   mu(x)    = P(Y=1 | X=x, R1=R2=1),  xi = mu/(1-mu)
//   varpi(x) = dP(x | R1=0, R2=1) / dP(x | R1=R2=1)
//   rho      = odds(Y=1 | R1=R2=1) / odds(Y=1 | R1=1)
struct NuisanceSet {
  std::map<std::string, double> zeta;
  std::map<std::string, double> alpha;
  std::map<std::string, double> beta;
  std::map<std::string, double> gamma;
  std::map<std::string, double> delta;
  std::map<std::string, double> mu;
  std::map<std::string, double> xi;
  std::map<std::string, double> varpi;
  std::optional<double> rho;
  bool y_binary = false;

  double p11 = 0.0;  // P(R1=1, R2=1)
  double p01 = 0.0;  // P(R1=0, R2=1)
  double p1 = 0.0;   // P(R1=1)

  // Observation counts behind each fitted table, for diagnostics; empty
  // when the set was extracted from a law.
  std::map<std::string, std::map<std::string, long long>> cell_counts;
  long long clip_events = 0;

  double zeta_at(const std::string& y) const { return at(zeta, y, "zeta"); }
  double alpha_at(const std::string& x) const { return at(alpha, x, "alpha"); }
  double beta_at(const std::string& x) const { return at(beta, x, "beta"); }
  double gamma_at(const std::string& x) const { return at(gamma, x, "gamma"); }
  double delta_at(const std::string& y) const { return at(delta, y, "delta"); }
  double mu_at(const std::string& x) const { return at(mu, x, "mu"); }
  double xi_at(const std::string& x) const { return at(xi, x, "xi"); }
  double varpi_at(const std::string& x) const { return at(varpi, x, "varpi"); }
  // beta/alpha, the regression the target averages over.
  double m_at(const std::string& x) const { return beta_at(x) / alpha_at(x); }

 private:
  static double at(const std::map<std::string, double>& table,
                   const std::string& label, const char* name);
};

// Exact extraction from a coarse law over (R1, R2, Y, X) by summation.
NuisanceSet nuisances_from_law(const TabularLaw& obs);

struct FitConfig {
  // Additive pseudo-count per cell; 0 disables smoothing, in which case an
  // empty required stratum raises EmptyStratum.
  double pseudo_count = 0.5;
  // Fitted probabilities are clipped into [floor, 1-floor]; each clip is
  // counted in NuisanceSet::clip_events.
  double clip_floor = 1e-6;
};

// Frequency-table fit over the supports observed in the data.
NuisanceSet fit_nuisances(const Dataset& d, const FitConfig& config = {});

// Which nuisances to bump and in which direction; an empty cell means the
// whole table. Valid names: zeta, gamma, mu (logit scale), alpha (log scale
// on alpha-1), beta, delta, varpi, rho (log scale). xi is derived from mu
// and cannot be bumped directly.
struct BumpSpec {
  struct Item {
    std::string nuisance;
    double sign = 1.0;
    std::optional<std::string> cell;
  };
  std::vector<Item> items;
};

// Deterministic misspecification of size eps. xi is recomputed from mu;
// delta is an independent nuisance and is only changed if named.
NuisanceSet perturb(const NuisanceSet& ns, double eps, const BumpSpec& spec);

// Influence-function evaluations at one observed record. The strata
// probabilities are passed explicitly so callers control whether they come
// from the law or from sample proportions.
double phi_general(const NuisanceSet& ns, double theta, double p01, int r1,
                   int r2, const std::string& y, const std::string& x);
double phi_binary(const NuisanceSet& ns, double rho, double theta, double p11,
                  double p01, int r1, int r2, const std::string& y,
                  const std::string& x);

std::string nuisances_to_json(const NuisanceSet& ns);

}  // namespace mnar

#endif  // MNAR_NUISANCE_HPP
