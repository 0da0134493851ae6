#include "mnar/identify.hpp"

#include <cmath>

#include "observed_view.hpp"

namespace mnar {

using detail::ObservedView;

namespace {

// beta(x)/alpha(x): the zeta-tilted conditional mean of Y given
// R1=R2=1, X=x. Requires mass in the (1,1,x) cell.
double tilted_mean(const ObservedView& v, const std::vector<double>& zeta,
                   std::size_t xi) {
  double p11x = v.p_11_x(xi);
  if (p11x <= 0.0)
    fail(Errc::PositivityViolation,
         "X=" + v.x_label(xi) + " has mass in the R1=0,R2=1 stratum but none "
                                "in the R1=1,R2=1 stratum");
  double num = 0.0, den = 0.0;
  for (std::size_t yi = 0; yi < v.ny(); ++yi) {
    double w = v.p(1, 1, yi, xi) / zeta[yi];
    num += v.y_value(yi) * w;
    den += w;
  }
  return num / den;
}

std::vector<double> zeta_table(const ObservedView& v) {
  std::vector<double> zeta(v.ny(), 1.0);
  for (std::size_t yi = 0; yi < v.ny(); ++yi)
    if (v.p_y_r1(yi) > 0.0) zeta[yi] = v.zeta(yi);
  return zeta;
}

double odds_y_given_r1(const ObservedView& v) {
  if (!v.y_binary())
    fail(Errc::NotBinaryOutcome, "Y support is not {0,1}");
  double p1 = 0.0, p0 = 0.0;
  for (std::size_t yi = 0; yi < v.ny(); ++yi)
    (v.y_value(yi) == 1.0 ? p1 : p0) += v.p_y_r1(yi);
  if (p1 <= 0.0 || p0 <= 0.0)
    fail(Errc::DegenerateOdds, "odds(Y=1 | R1=1) is zero or infinite");
  return p1 / p0;
}

double odds_y_given_11(const ObservedView& v) {
  if (!v.y_binary())
    fail(Errc::NotBinaryOutcome, "Y support is not {0,1}");
  double p1 = 0.0, p0 = 0.0;
  for (std::size_t yi = 0; yi < v.ny(); ++yi)
    (v.y_value(yi) == 1.0 ? p1 : p0) += v.p_11_y(yi);
  if (p1 <= 0.0 || p0 <= 0.0)
    fail(Errc::DegenerateOdds, "odds(Y=1 | R1=R2=1) is zero or infinite");
  return p1 / p0;
}

double xi_cell(const ObservedView& v, std::size_t xi) {
  if (!v.y_binary())
    fail(Errc::NotBinaryOutcome, "Y support is not {0,1}");
  double p1 = 0.0, p0 = 0.0;
  for (std::size_t yi = 0; yi < v.ny(); ++yi)
    (v.y_value(yi) == 1.0 ? p1 : p0) += v.p(1, 1, yi, xi);
  if (p0 <= 0.0)
    fail(Errc::DegenerateOdds,
         "odds(Y=1 | X=" + v.x_label(xi) + ", R1=R2=1) is infinite");
  return p1 / p0;
}

}  // namespace

double full_law_density(const TabularLaw& obs, const std::string& x,
                        const std::string& y) {
  ObservedView v(obs);
  std::size_t xi = v.nx(), yi = v.ny();
  for (std::size_t i = 0; i < v.nx(); ++i)
    if (v.x_label(i) == x) xi = i;
  for (std::size_t i = 0; i < v.ny(); ++i)
    if (v.y_label(i) == y) yi = i;
  if (xi == v.nx()) fail(Errc::UnknownLabel, "no X label " + x);
  if (yi == v.ny()) fail(Errc::UnknownLabel, "no Y label " + y);

  double p_r1_y = v.p_y_r1(yi);
  double p11y = v.p_11_y(yi);
  if (p11y <= 0.0)
    fail(Errc::PositivityViolation,
         "P(X=" + x + " | R1=1, Y=" + y + ", R2=1) needs positive "
         "P(R1=1, Y=" + y + ", R2=1)");
  double cond_x_given_y = v.p(1, 1, yi, xi) / p11y;

  // The mixing integral over y' shared by both factors of the brace.
  double mixture = 0.0;
  for (std::size_t yj = 0; yj < v.ny(); ++yj) {
    double p11yj = v.p_11_y(yj);
    if (p11yj <= 0.0) {
      if (v.p_y_r1(yj) > 0.0)
        fail(Errc::PositivityViolation,
             "P(X=" + x + " | R1=1, Y=" + v.y_label(yj) +
                 ", R2=1) needs positive P(R1=1, Y=" + v.y_label(yj) +
                 ", R2=1)");
      continue;
    }
    mixture += v.p(1, 1, yj, xi) / p11yj * v.p_y_r1(yj);
  }

  double p_r1_0 = v.p_r1(0);
  double brace = 1.0;
  if (p_r1_0 > 0.0) {
    double p01 = v.stratum(0, 1);
    if (p01 <= 0.0)
      fail(Errc::PositivityViolation,
           "P(X=" + x + " | R1=0, R2=1) needs positive P(R1=0, R2=1)");
    double cond_x_given_01 = v.p_01_x(xi) / p01;
    if (mixture <= 0.0)
      fail(Errc::PositivityViolation,
           "mixture density at X=" + x + " is zero in the R1=1 stratum");
    brace = 1.0 + cond_x_given_01 * p_r1_0 / mixture;
  }
  return p_r1_y * cond_x_given_y * brace;
}

TabularLaw identified_full_law(const TabularLaw& obs) {
  ObservedView v(obs);
  std::vector<Variable> vars = {{"Y1", v.y_labels()}, {"X1", v.x_labels()}};
  std::vector<double> probs;
  probs.reserve(v.ny() * v.nx());
  for (std::size_t yi = 0; yi < v.ny(); ++yi)
    for (std::size_t xi = 0; xi < v.nx(); ++xi)
      probs.push_back(full_law_density(obs, v.x_label(xi), v.y_label(yi)));
  return TabularLaw(std::move(vars), std::move(probs));
}

double theta_prop1(const TabularLaw& obs) {
  ObservedView v(obs);
  double p01 = v.stratum(0, 1);
  if (p01 <= 0.0)
    fail(Errc::ZeroProbabilityEvent, "P(R1=0, R2=1) is zero");
  auto zeta = zeta_table(v);
  double total = 0.0;
  for (std::size_t xi = 0; xi < v.nx(); ++xi) {
    double w = v.p_01_x(xi);
    if (w <= 0.0) continue;
    total += w * tilted_mean(v, zeta, xi);
  }
  return total / p01;
}

double psi_prop1(const TabularLaw& obs) {
  ObservedView v(obs);
  double p1 = v.p_r1(1);
  double complete_case = 0.0;
  if (p1 > 0.0) {
    for (std::size_t yi = 0; yi < v.ny(); ++yi)
      complete_case += v.y_value(yi) * v.p_y_r1(yi);
    complete_case /= p1;
  }
  double p0 = v.p_r1(0);
  if (p0 <= 0.0) return complete_case;
  return p1 * complete_case + p0 * theta_prop1(obs);
}

double rho_of(const TabularLaw& obs) {
  ObservedView v(obs);
  return odds_y_given_11(v) / odds_y_given_r1(v);
}

double theta_binary_known_rho(const TabularLaw& obs, double rho) {
  if (!(rho > 0.0)) fail(Errc::DegenerateOdds, "rho must be positive");
  ObservedView v(obs);
  if (!v.y_binary())
    fail(Errc::NotBinaryOutcome, "Y support is not {0,1}");
  double p01 = v.stratum(0, 1);
  if (p01 <= 0.0)
    fail(Errc::ZeroProbabilityEvent, "P(R1=0, R2=1) is zero");
  double total = 0.0;
  for (std::size_t xi = 0; xi < v.nx(); ++xi) {
    double w = v.p_01_x(xi);
    if (w <= 0.0) continue;
    if (v.p_11_x(xi) <= 0.0)
      fail(Errc::PositivityViolation,
           "X=" + v.x_label(xi) + " has mass in the R1=0,R2=1 stratum but "
                                  "none in the R1=1,R2=1 stratum");
    double xi_val = xi_cell(v, xi);
    total += w * xi_val / (rho + xi_val);
  }
  return total / p01;
}

double theta_binary(const TabularLaw& obs) {
  return theta_binary_known_rho(obs, rho_of(obs));
}

double xi_at(const TabularLaw& obs, const std::string& x) {
  ObservedView v(obs);
  for (std::size_t xi = 0; xi < v.nx(); ++xi)
    if (v.x_label(xi) == x) return xi_cell(v, xi);
  fail(Errc::UnknownLabel, "no X label " + x);
}

DensityRatio density_ratio_form(const TabularLaw& obs, const std::string& x) {
  ObservedView v(obs);
  std::size_t xi = v.nx();
  for (std::size_t i = 0; i < v.nx(); ++i)
    if (v.x_label(i) == x) xi = i;
  if (xi == v.nx()) fail(Errc::UnknownLabel, "no X label " + x);

  double prior_odds = odds_y_given_r1(v);

  double p1 = 0.0, p0 = 0.0;        // P(R1=R2=1, Y=y, X=x) by outcome
  double m1 = 0.0, m0 = 0.0;        // P(R1=R2=1, Y=y) by outcome
  for (std::size_t yi = 0; yi < v.ny(); ++yi) {
    double cell = v.p(1, 1, yi, xi);
    double marg = v.p_11_y(yi);
    if (v.y_value(yi) == 1.0) {
      p1 += cell;
      m1 += marg;
    } else {
      p0 += cell;
      m0 += marg;
    }
  }
  if (m1 <= 0.0 || m0 <= 0.0)
    fail(Errc::DegenerateOdds, "odds(Y=1 | R1=R2=1) is zero or infinite");
  double d1 = p1 / m1, d0 = p0 / m0;
  if (d1 <= 0.0 || d0 <= 0.0)
    fail(Errc::ZeroDensity,
         "conditional density of X=" + x + " vanishes given Y=1 or Y=0");
  double lambda = d1 / d0;
  double post_odds = prior_odds * lambda;
  return {lambda, post_odds / (1.0 + post_odds)};
}

ExposureLaw make_exposure_law(const ConditionalFactor& x_factor,
                              const ConditionalFactor& a1_factor,
                              const ConditionalFactor& y_factor,
                              const ConditionalFactor& r_factor) {
  require(x_factor.var == "X" && a1_factor.var == "A1" &&
              y_factor.var == "Y" && r_factor.var == "R",
          Errc::UnknownVariable,
          "exposure factors must be named X, A1, Y, R");
  require(r_factor.support == std::vector<std::string>{"0", "1"},
          Errc::SupportMismatch, "R must have support {0,1}");
  TabularLaw full =
      law_from_factors({x_factor, a1_factor, y_factor, r_factor});

  // Positivity of the response probability wherever (x, y) has mass.
  const std::size_t xv = full.var_index("X"), av = full.var_index("A1");
  const std::size_t yv = full.var_index("Y"), rv = full.var_index("R");
  const auto& xs = x_factor.support;
  const auto& as = a1_factor.support;
  const auto& ys = y_factor.support;
  for (const auto& x : xs)
    for (const auto& y : ys) {
      double mass = 0.0, responding = 0.0;
      for (const auto& a : as) {
        for (const char* r : {"0", "1"}) {
          std::vector<std::size_t> idx(4);
          idx[xv] = full.label_index(xv, x);
          idx[av] = full.label_index(av, a);
          idx[yv] = full.label_index(yv, y);
          idx[rv] = full.label_index(rv, r);
          double p = full.prob(idx);
          mass += p;
          if (r[0] == '1') responding += p;
        }
      }
      if (mass > 0.0 && responding <= 0.0)
        fail(Errc::PositivityViolation,
             "P(R=1 | X=" + x + ", Y=" + y + ") is zero");
    }

  // Coarsen: A is revealed only when R=1.
  std::vector<std::string> a_obs = as;
  a_obs.push_back(missing_token());
  std::vector<Variable> obs_vars = {
      {"X", xs}, {"R", {"0", "1"}}, {"A", a_obs}, {"Y", ys}};
  std::vector<double> obs_probs(xs.size() * 2 * a_obs.size() * ys.size(), 0.0);
  for (std::size_t cell = 0; cell < full.n_cells(); ++cell) {
    auto idx = full.indices_of(cell);
    std::size_t r = idx[rv];
    std::size_t ai = r == 1 ? idx[av] : as.size();
    std::size_t flat =
        ((idx[xv] * 2 + r) * a_obs.size() + ai) * ys.size() + idx[yv];
    obs_probs[flat] += full.prob_cell(cell);
  }
  return {std::move(full), TabularLaw(std::move(obs_vars), std::move(obs_probs))};
}

double exposure_mean(const ExposureLaw& el, const std::string& a,
                     const std::string& x) {
  const TabularLaw& obs = el.observed;
  const std::size_t xv = obs.var_index("X"), rv = obs.var_index("R");
  const std::size_t av = obs.var_index("A"), yv = obs.var_index("Y");
  const std::size_t xi = obs.label_index(xv, x);
  const std::size_t ai = obs.label_index(av, a);
  const auto& ys = obs.variables()[yv].support;
  const std::size_t na = obs.variables()[av].support.size();

  auto mass = [&](std::size_t r, std::size_t aa, std::size_t yy) {
    std::vector<std::size_t> idx(4);
    idx[xv] = xi;
    idx[rv] = r;
    idx[av] = aa;
    idx[yv] = yy;
    return obs.prob(idx);
  };

  double num = 0.0, den = 0.0, px = 0.0;
  for (std::size_t yy = 0; yy < ys.size(); ++yy) {
    // P(X=x, Y=y) summed over R and A, then the observed-arm conditional.
    double pxy = 0.0, pr1 = 0.0, pr1a = 0.0;
    for (std::size_t aa = 0; aa < na; ++aa) {
      pxy += mass(0, aa, yy) + mass(1, aa, yy);
      pr1 += mass(1, aa, yy);
    }
    pr1a = mass(1, ai, yy);
    px += pxy;
    if (pxy <= 0.0) continue;
    if (pr1 <= 0.0)
      fail(Errc::PositivityViolation,
           "P(R=1 | X=" + x + ", Y=" + ys[yy] + ") is zero");
    double lam = pr1a / pr1;  // P(A=a | X=x, Y=y, R=1)
    num += label_number(ys[yy]) * lam * pxy;
    den += lam * pxy;
  }
  if (px <= 0.0) fail(Errc::ZeroProbabilityEvent, "P(X=" + x + ") is zero");
  if (den <= 0.0)
    fail(Errc::PositivityViolation,
         "exposure arm A=" + a + " has zero conditional propensity at X=" + x);
  return num / den;
}

}  // namespace mnar
