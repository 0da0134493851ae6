#ifndef MNAR_ESTIMATE_HPP
#define MNAR_ESTIMATE_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mnar/nuisance.hpp"
#include "mnar/perm_model.hpp"

namespace mnar {

inline constexpr double kWaldZ = 1.959964;  // 95% normal quantile, pinned

enum class Method { plugin, onestep_general, onestep_binary };
const char* method_name(Method m);

struct ObsCellKey {
  int r1 = 0;
  int r2 = 0;
  std::string y;
  std::string x;
  auto operator<=>(const ObsCellKey&) const = default;
};

struct Diagnostics {
  long long clip_events = 0;
  std::vector<std::uint64_t> fold_seeds;
  std::string rho_mode;  // "known:<value>" or "estimate"
  std::vector<std::string> caveats;
};

struct Estimate {
  double value = 0.0;
  std::optional<double> standard_error;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t n = 0;
  Method method = Method::plugin;
  Diagnostics diagnostics;
  // Influence values by observed cell (records in a cell share the value);
  // empty for the plain plug-in.
  std::map<ObsCellKey, double> if_cell_values;
};

// Records aggregated by observed cell; every estimator works from this, so
// results cannot depend on record order.
std::map<ObsCellKey, std::size_t> cell_histogram(const Dataset& d);

// Mean of beta/alpha over the R1=0, R2=1 records. No influence correction
// and no standard error.
Estimate plugin_theta(const NuisanceSet& ns, const Dataset& d);

// Plug-in plus the empirical mean of the influence function, with the
// standard error taken from the influence values.
Estimate onestep_theta(const NuisanceSet& ns, const Dataset& d);

struct RhoSpec {
  bool estimate = false;
  double value = 0.0;
  static RhoSpec known(double v) { return {false, v}; }
  static RhoSpec estimated() { return {true, 0.0}; }
};

// Binary-outcome one-step in the odds parameterization. With
// RhoSpec::estimated() the sample odds ratio is plugged in and the
// known-rho standard error is reported, flagged in diagnostics.
Estimate onestep_theta_binary(const NuisanceSet& ns, const Dataset& d,
                              const RhoSpec& rho);

// psi from the complete-case mean and a theta estimate, with influence
// values combined by the delta method. theta may be omitted only when the
// sample has no R1=0 records.
Estimate psi_estimate(const Dataset& d, const std::optional<Estimate>& theta);

struct CrossfitConfig {
  std::size_t folds = 2;
  std::uint64_t seed = 0;
  FitConfig fit;
};

// K-fold cross-fitting of the general one-step: nuisances are fit on each
// fold's complement and the estimating equation is averaged over held-out
// records. Deterministic given (dataset, folds, seed).
Estimate crossfit(const Dataset& d, const CrossfitConfig& config);

enum class McTarget { theta, psi };

struct McConfig {
  std::size_t n = 4000;
  std::size_t reps = 500;
  std::uint64_t seed = 1;
  Method method = Method::onestep_general;
  McTarget target = McTarget::theta;
  FitConfig fit;
  RhoSpec rho = RhoSpec::estimated();
  std::size_t folds = 0;  // 0 = fit nuisances in-sample
  // Optional deliberate nuisance misspecification applied after each fit.
  double perturb_eps = 0.0;
  BumpSpec bumps;
};

struct McRep {
  double value = 0.0;
  std::optional<double> se;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  bool covered = false;
};

struct McResult {
  double truth = 0.0;
  std::vector<McRep> reps;
  double mean_bias = 0.0;
  double sd_value = 0.0;
  double median_abs_bias = 0.0;
  double coverage = 0.0;  // among reps that produced an interval
  std::size_t n_with_ci = 0;
};

// Seeded replication study against the law's exact truth. Replication r
// draws its dataset from a substream of (seed, r); reruns are identical.
McResult monte_carlo(const PermutationLaw& law, const McConfig& config);

std::string estimate_to_json(const Estimate& e);

}  // namespace mnar

#endif  // MNAR_ESTIMATE_HPP
