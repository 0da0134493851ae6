#include "mnar/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "mnar/identify.hpp"
#include "mnar/rng.hpp"

namespace mnar {

const char* method_name(Method m) {
  switch (m) {
    case Method::plugin: return "plugin";
    case Method::onestep_general: return "onestep_general";
    case Method::onestep_binary: return "onestep_binary";
  }
  return "?";
}

std::map<ObsCellKey, std::size_t> cell_histogram(const Dataset& d) {
  std::map<ObsCellKey, std::size_t> hist;
  for (const auto& rec : d.records)
    ++hist[ObsCellKey{rec.r1, rec.r2, rec.y, rec.x}];
  return hist;
}

namespace {

struct WeightedStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n-1 denominator)
};

WeightedStats weighted_stats(const std::map<ObsCellKey, double>& values,
                             const std::map<ObsCellKey, std::size_t>& hist,
                             double n) {
  double mean = 0.0;
  for (const auto& [key, count] : hist) mean += count * values.at(key);
  mean /= n;
  double ss = 0.0;
  for (const auto& [key, count] : hist) {
    double dev = values.at(key) - mean;
    ss += count * dev * dev;
  }
  double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd};
}

void attach_wald(Estimate& e, double sd) {
  double se = sd / std::sqrt(static_cast<double>(e.n));
  e.standard_error = se;
  e.ci_low = e.value - kWaldZ * se;
  e.ci_high = e.value + kWaldZ * se;
}

double plugin_value(const NuisanceSet& ns,
                    const std::map<ObsCellKey, std::size_t>& hist) {
  double total = 0.0;
  std::size_t n01 = 0;
  for (const auto& [key, count] : hist) {
    if (key.r1 == 0 && key.r2 == 1) {
      total += count * ns.m_at(key.x);
      n01 += count;
    }
  }
  if (n01 == 0)
    fail(Errc::EmptyStratum, "no records in the R1=0, R2=1 stratum");
  return total / n01;
}

}  // namespace

Estimate plugin_theta(const NuisanceSet& ns, const Dataset& d) {
  auto hist = cell_histogram(d);
  Estimate e;
  e.value = plugin_value(ns, hist);
  e.n = d.size();
  e.method = Method::plugin;
  e.diagnostics.clip_events = ns.clip_events;
  return e;
}

Estimate onestep_theta(const NuisanceSet& ns, const Dataset& d) {
  auto hist = cell_histogram(d);
  const double n = static_cast<double>(d.size());
  double theta_plugin = plugin_value(ns, hist);
  double n01 = 0.0;
  for (const auto& [key, count] : hist)
    if (key.r1 == 0 && key.r2 == 1) n01 += count;
  double p01 = n01 / n;

  std::map<ObsCellKey, double> phi;
  for (const auto& [key, count] : hist)
    phi[key] = phi_general(ns, theta_plugin, p01, key.r1, key.r2, key.y, key.x);

  auto stats = weighted_stats(phi, hist, n);
  Estimate e;
  e.value = theta_plugin + stats.mean;
  e.n = d.size();
  e.method = Method::onestep_general;
  e.diagnostics.clip_events = ns.clip_events;
  e.if_cell_values = std::move(phi);
  attach_wald(e, stats.sd);
  return e;
}

Estimate onestep_theta_binary(const NuisanceSet& ns, const Dataset& d,
                              const RhoSpec& rho_spec) {
  if (!ns.y_binary) fail(Errc::NotBinaryOutcome, "Y is not binary");
  double rho;
  Diagnostics diag;
  diag.clip_events = ns.clip_events;
  if (rho_spec.estimate) {
    if (!ns.rho) fail(Errc::DegenerateOdds, "no fitted rho available");
    rho = *ns.rho;
    diag.rho_mode = "estimate";
    diag.caveats.push_back(
        "rho was estimated; the reported standard error treats it as known");
  } else {
    rho = rho_spec.value;
    diag.rho_mode = "known:" + std::to_string(rho_spec.value);
  }
  if (!(rho > 0.0)) fail(Errc::DegenerateOdds, "rho must be positive");

  auto hist = cell_histogram(d);
  const double n = static_cast<double>(d.size());
  double n11 = 0.0, n01 = 0.0;
  for (const auto& [key, count] : hist) {
    if (key.r1 == 1 && key.r2 == 1) n11 += count;
    if (key.r1 == 0 && key.r2 == 1) n01 += count;
  }
  if (n11 == 0.0)
    fail(Errc::EmptyStratum, "no records in the R1=1, R2=1 stratum");
  if (n01 == 0.0)
    fail(Errc::EmptyStratum, "no records in the R1=0, R2=1 stratum");
  double p11 = n11 / n, p01 = n01 / n;

  // The estimator is the sample mean of the influence expression with the
  // centering term dropped; phi below restores it for the variance.
  std::map<ObsCellKey, double> term;
  double value = 0.0;
  for (const auto& [key, count] : hist) {
    double t =
        phi_binary(ns, rho, 0.0, p11, p01, key.r1, key.r2, key.y, key.x);
    term[key] = t;
    value += count * t;
  }
  value /= n;

  std::map<ObsCellKey, double> phi;
  for (const auto& [key, count] : hist) {
    double centering =
        key.r1 == 0 && key.r2 == 1 ? value / p01 : 0.0;
    phi[key] = term[key] - centering;
  }

  auto stats = weighted_stats(phi, hist, n);
  Estimate e;
  e.value = value;
  e.n = d.size();
  e.method = Method::onestep_binary;
  e.diagnostics = std::move(diag);
  e.if_cell_values = std::move(phi);
  attach_wald(e, stats.sd);
  return e;
}

Estimate psi_estimate(const Dataset& d, const std::optional<Estimate>& theta) {
  auto hist = cell_histogram(d);
  const double n = static_cast<double>(d.size());
  double n1 = 0.0, sum_y = 0.0;
  for (const auto& [key, count] : hist) {
    if (key.r1 == 1) {
      n1 += count;
      sum_y += count * label_number(key.y);
    }
  }
  if (n1 == 0.0) fail(Errc::EmptyStratum, "no records with R1=1");
  double p1 = n1 / n, m1 = sum_y / n1;
  double p0 = 1.0 - p1;

  Estimate e;
  e.n = d.size();
  if (n1 == n) {
    // No missing outcomes: psi is the complete-case mean.
    e.value = m1;
    e.method = theta ? theta->method : Method::plugin;
    std::map<ObsCellKey, double> inf;
    for (const auto& [key, count] : hist)
      inf[key] = label_number(key.y) - m1;
    auto stats = weighted_stats(inf, hist, n);
    e.if_cell_values = std::move(inf);
    attach_wald(e, stats.sd);
    return e;
  }

  if (!theta)
    fail(Errc::EmptyStratum,
         "sample has R1=0 records, so a theta estimate is required");
  e.value = p1 * m1 + p0 * theta->value;
  e.method = theta->method;
  e.diagnostics = theta->diagnostics;

  if (!theta->if_cell_values.empty()) {
    std::map<ObsCellKey, double> inf;
    for (const auto& [key, count] : hist) {
      double piece = (key.r1 - p1) * (m1 - theta->value);
      if (key.r1 == 1) piece += label_number(key.y) - m1;
      piece += p0 * theta->if_cell_values.at(key);
      inf[key] = piece;
    }
    auto stats = weighted_stats(inf, hist, n);
    e.if_cell_values = std::move(inf);
    attach_wald(e, stats.sd);
  }
  return e;
}

Estimate crossfit(const Dataset& d, const CrossfitConfig& config) {
  const std::size_t n = d.size();
  if (config.folds < 2) fail(Errc::FoldTooSmall, "need at least 2 folds");
  if (config.folds > n)
    fail(Errc::FoldTooSmall, "more folds than records");
  const std::size_t k_folds = config.folds;

  // Seeded permutation dealt round-robin into folds.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  SplitMix64 rng = substream(config.seed, 0xF01D);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<std::size_t> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[perm[pos]] = pos % k_folds;

  double num_total = 0.0, den_total = 0.0;
  // (fold, cell) -> count, for the variance pass.
  std::map<std::pair<std::size_t, ObsCellKey>, std::size_t> fold_hist;
  std::vector<NuisanceSet> fitted(k_folds);
  long long clip_events = 0;
  for (std::size_t k = 0; k < k_folds; ++k) {
    Dataset complement;
    complement.seed = d.seed;
    complement.generator = d.generator;
    for (std::size_t i = 0; i < n; ++i)
      if (fold_of[i] != k) complement.records.push_back(d.records[i]);
    if (complement.records.empty())
      fail(Errc::FoldTooSmall, "a fold complement is empty");
    fitted[k] = fit_nuisances(complement, config.fit);
    clip_events += fitted[k].clip_events;
  }
  for (std::size_t i = 0; i < n; ++i)
    ++fold_hist[{fold_of[i], ObsCellKey{d.records[i].r1, d.records[i].r2,
                                        d.records[i].y, d.records[i].x}}];

  auto ee_numerator = [](const NuisanceSet& ns, const ObsCellKey& key) {
    double num = 0.0;
    if (key.r1 == 0 && key.r2 == 1) num += ns.m_at(key.x);
    if (key.r1 == 1) {
      double z = ns.zeta_at(key.y);
      if (key.r2 == 1) {
        double g = ns.gamma_at(key.x);
        num += (1.0 / ns.alpha_at(key.x)) * (1.0 / z) * ((1.0 - g) / g) *
               (label_number(key.y) - ns.m_at(key.x));
      }
      num -= ((key.r2 == 1 ? 1.0 / z : 0.0) - 1.0) * ns.delta_at(key.y);
    }
    return num;
  };

  std::map<std::pair<std::size_t, ObsCellKey>, double> numerators;
  for (const auto& [fk, count] : fold_hist) {
    double num = ee_numerator(fitted[fk.first], fk.second);
    numerators[fk] = num;
    num_total += count * num;
    if (fk.second.r1 == 0 && fk.second.r2 == 1) den_total += count;
  }
  if (den_total == 0.0)
    fail(Errc::EmptyStratum, "no records in the R1=0, R2=1 stratum");
  double value = num_total / den_total;
  double p01 = den_total / static_cast<double>(n);

  // Influence values at the solved theta, for the Wald interval.
  double mean = 0.0;
  for (const auto& [fk, count] : fold_hist) {
    double den = fk.second.r1 == 0 && fk.second.r2 == 1 ? 1.0 : 0.0;
    mean += count * (numerators[fk] - den * value) / p01;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const auto& [fk, count] : fold_hist) {
    double den = fk.second.r1 == 0 && fk.second.r2 == 1 ? 1.0 : 0.0;
    double dev = (numerators[fk] - den * value) / p01 - mean;
    ss += count * dev * dev;
  }
  double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

  Estimate e;
  e.value = value;
  e.n = n;
  e.method = Method::onestep_general;
  e.diagnostics.clip_events = clip_events;
  for (std::size_t k = 0; k < k_folds; ++k)
    e.diagnostics.fold_seeds.push_back(derive_seed(config.seed, k));
  attach_wald(e, sd);
  return e;
}

McResult monte_carlo(const PermutationLaw& law, const McConfig& config) {
  McResult result;
  result.truth = config.target == McTarget::theta ? true_theta(law)
                                                  : true_psi(law);
  result.reps.reserve(config.reps);

  for (std::size_t rep = 0; rep < config.reps; ++rep) {
    Dataset d = sample(law, config.n, derive_seed(config.seed, rep));
    Estimate est;
    if (config.folds > 0) {
      est = crossfit(d, {config.folds, derive_seed(config.seed, rep) ^ 0x5EEDULL,
                         config.fit});
    } else {
      NuisanceSet ns = fit_nuisances(d, config.fit);
      if (config.perturb_eps > 0.0)
        ns = perturb(ns, config.perturb_eps, config.bumps);
      switch (config.method) {
        case Method::plugin: est = plugin_theta(ns, d); break;
        case Method::onestep_general: est = onestep_theta(ns, d); break;
        case Method::onestep_binary:
          est = onestep_theta_binary(ns, d, config.rho);
          break;
      }
    }
    if (config.target == McTarget::psi) est = psi_estimate(d, est);

    McRep r;
    r.value = est.value;
    r.se = est.standard_error;
    r.ci_low = est.ci_low;
    r.ci_high = est.ci_high;
    r.covered = est.ci_low && est.ci_high && *est.ci_low <= result.truth &&
                result.truth <= *est.ci_high;
    result.reps.push_back(r);
  }

  const double reps = static_cast<double>(result.reps.size());
  std::vector<double> abs_bias;
  double mean_value = 0.0;
  std::size_t covered = 0;
  for (const auto& r : result.reps) {
    mean_value += r.value;
    abs_bias.push_back(std::abs(r.value - result.truth));
    if (r.ci_low) {
      ++result.n_with_ci;
      covered += r.covered ? 1 : 0;
    }
  }
  mean_value /= reps;
  result.mean_bias = mean_value - result.truth;
  double ss = 0.0;
  for (const auto& r : result.reps) {
    double dev = r.value - mean_value;
    ss += dev * dev;
  }
  result.sd_value = reps > 1 ? std::sqrt(ss / (reps - 1.0)) : 0.0;
  std::sort(abs_bias.begin(), abs_bias.end());
  result.median_abs_bias =
      abs_bias.empty()
          ? 0.0
          : (abs_bias.size() % 2 == 1
                 ? abs_bias[abs_bias.size() / 2]
                 : 0.5 * (abs_bias[abs_bias.size() / 2 - 1] +
                          abs_bias[abs_bias.size() / 2]));
  result.coverage =
      result.n_with_ci > 0
          ? static_cast<double>(covered) / static_cast<double>(result.n_with_ci)
          : 0.0;
  return result;
}

std::string estimate_to_json(const Estimate& e) {
  nlohmann::json j;
  j["spec_version"] = "1";
  j["value"] = e.value;
  if (e.standard_error) {
    j["standard_error"] = *e.standard_error;
    j["ci_low"] = *e.ci_low;
    j["ci_high"] = *e.ci_high;
  } else {
    j["standard_error"] = nullptr;
  }
  j["n"] = e.n;
  j["method"] = method_name(e.method);
  nlohmann::json diag;
  diag["clip_events"] = e.diagnostics.clip_events;
  diag["fold_seeds"] = e.diagnostics.fold_seeds;
  if (!e.diagnostics.rho_mode.empty()) diag["rho_mode"] = e.diagnostics.rho_mode;
  diag["caveats"] = e.diagnostics.caveats;
  j["diagnostics"] = diag;
  return j.dump(2);
}

}  // namespace mnar
