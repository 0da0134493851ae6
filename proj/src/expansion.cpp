#include "mnar/expansion.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "mnar/identify.hpp"
#include "observed_view.hpp"

namespace mnar {

using detail::ObservedView;

namespace {

void check_same_support(const TabularLaw& p, const TabularLaw& pbar) {
  if (p.n_variables() != pbar.n_variables())
    fail(Errc::SupportMismatch, "laws have different variable counts");
  for (std::size_t i = 0; i < p.n_variables(); ++i) {
    const auto& a = p.variables()[i];
    const auto& b = pbar.variables()[i];
    if (a.name != b.name || a.support != b.support)
      fail(Errc::SupportMismatch, "laws disagree at variable " + a.name);
  }
}

// Walk the consistent observed cells of a view and hand (r1, r2, y, x,
// mass-under-each-law) to the callback; y/x are empty on missing slots.
template <typename F>
void for_each_cell(const ObservedView& vp, const ObservedView& vq, F&& f) {
  for (int r1 = 0; r1 <= 1; ++r1)
    for (int r2 = 0; r2 <= 1; ++r2) {
      std::size_t y_lo = r1 == 1 ? 0 : vp.ny();
      std::size_t y_hi = r1 == 1 ? vp.ny() - 1 : vp.ny();
      std::size_t x_lo = r2 == 1 ? 0 : vp.nx();
      std::size_t x_hi = r2 == 1 ? vp.nx() - 1 : vp.nx();
      for (std::size_t yi = y_lo; yi <= y_hi; ++yi)
        for (std::size_t xi = x_lo; xi <= x_hi; ++xi)
          f(r1, r2, yi, xi, vp.p(r1, r2, yi, xi), vq.p(r1, r2, yi, xi));
    }
}

double phi_general_cell(const ObservedView& v, const NuisanceSet& ns,
                        double theta, double p01, int r1, int r2,
                        std::size_t yi, std::size_t xi) {
  return phi_general(ns, theta, p01, r1, r2,
                     r1 == 1 ? v.y_label(yi) : missing_token(),
                     r2 == 1 ? v.x_label(xi) : missing_token());
}

double phi_binary_cell(const ObservedView& v, const NuisanceSet& ns,
                       double rho, double theta, double p11, double p01,
                       int r1, int r2, std::size_t yi, std::size_t xi) {
  return phi_binary(ns, rho, theta, p11, p01, r1, r2,
                    r1 == 1 ? v.y_label(yi) : missing_token(),
                    r2 == 1 ? v.x_label(xi) : missing_token());
}

}  // namespace

ExpansionReport expansion_check(const TabularLaw& p, const TabularLaw& pbar) {
  check_same_support(p, pbar);
  ObservedView vp(p), vq(pbar);

  NuisanceSet ns = nuisances_from_law(p);
  NuisanceSet nsb = nuisances_from_law(pbar);
  ExpansionReport rep;
  rep.theta_p = theta_prop1(p);
  rep.theta_pbar = theta_prop1(pbar);

  double if_integral = 0.0;
  for_each_cell(vp, vq, [&](int r1, int r2, std::size_t yi, std::size_t xi,
                            double mp, double mq) {
    double diff = mq - mp;
    if (diff == 0.0) return;
    if_integral += diff * phi_general_cell(vp, nsb, rep.theta_pbar, nsb.p01,
                                           r1, r2, yi, xi);
  });
  rep.if_integral = if_integral;
  rep.remainder_identity = rep.theta_pbar - rep.theta_p - if_integral;

  rep.general =
      general_remainder_terms(p, ns, nsb, rep.theta_p, rep.theta_pbar);
  rep.remainder_formula = rep.general->total();
  rep.identity_residual =
      std::abs(*rep.remainder_formula - rep.remainder_identity);
  return rep;
}

GeneralRemainder general_remainder_terms(const TabularLaw& p,
                                         const NuisanceSet& ns,
                                         const NuisanceSet& nsb,
                                         double theta_p, double theta_pbar) {
  ObservedView vp(p);
  GeneralRemainder rem;
  rem.strata_term = (1.0 - ns.p01 / nsb.p01) * (theta_pbar - theta_p);
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  for_each_cell(vp, vp, [&](int r1, int r2, std::size_t yi, std::size_t xi,
                            double mp, double /*mq*/) {
    if (mp == 0.0 || r2 != 1) return;
    const std::string& x = vp.x_label(xi);
    double m = ns.m_at(x), mb = nsb.m_at(x);
    double g = ns.gamma_at(x), gb = nsb.gamma_at(x);
    double a = ns.alpha_at(x), ab = nsb.alpha_at(x);
    t1 += mp * (mb - m) * ((1.0 - g) - (a / ab) * (g / gb) * (1.0 - gb));
    if (r1 != 1) return;
    const std::string& y = vp.y_label(yi);
    double dz = 1.0 / nsb.zeta_at(y) - 1.0 / ns.zeta_at(y);
    t2 -= mp * (1.0 / ab) * ((1.0 - gb) / gb) * (mb - m) * dz;
    t3 -= mp * dz * (nsb.delta_at(y) - ns.delta_at(y));
    t4 += mp * (vp.y_value(yi) - m) * dz *
          ((1.0 / ab) * ((1.0 - gb) / gb) - (1.0 / a) * ((1.0 - g) / g));
  });
  rem.term1 = t1 / nsb.p01;
  rem.term2 = t2 / nsb.p01;
  rem.term3 = t3 / nsb.p01;
  rem.term4 = t4 / nsb.p01;
  return rem;
}

ExpansionReport expansion_check_binary(const TabularLaw& p,
                                       const TabularLaw& pbar, double rho) {
  check_same_support(p, pbar);
  ObservedView vp(p), vq(pbar);

  NuisanceSet ns = nuisances_from_law(p);
  NuisanceSet nsb = nuisances_from_law(pbar);
  if (!ns.y_binary || !nsb.y_binary)
    fail(Errc::NotBinaryOutcome, "Y support is not {0,1}");

  ExpansionReport rep;
  rep.theta_p = theta_binary_known_rho(p, rho);
  rep.theta_pbar = theta_binary_known_rho(pbar, rho);

  double if_integral = 0.0;
  for_each_cell(vp, vq, [&](int r1, int r2, std::size_t yi, std::size_t xi,
                            double mp, double mq) {
    double diff = mq - mp;
    if (diff == 0.0) return;
    if_integral += diff * phi_binary_cell(vp, nsb, rho, rep.theta_pbar,
                                          nsb.p11, nsb.p01, r1, r2, yi, xi);
  });
  rep.if_integral = if_integral;
  rep.remainder_identity = rep.theta_pbar - rep.theta_p - if_integral;

  BinaryRemainderPieces pieces;
  double xi_varpi = 0.0, strata_mix = 0.0;
  for (std::size_t xi = 0; xi < vp.nx(); ++xi) {
    const std::string& x = vp.x_label(xi);
    double xv = ns.xi_at(x), xvb = nsb.xi_at(x);
    double g = xv / (rho + xv), gb = xvb / (rho + xvb);
    double p11x = vp.p_11_x(xi);
    if (p11x > 0.0)
      xi_varpi += (p11x / ns.p11) * (g - gb) *
                  (nsb.varpi_at(x) - ns.varpi_at(x));
    double p01x = vp.p_01_x(xi);
    if (p01x > 0.0) strata_mix += (p01x / ns.p01) * (gb - g);
  }
  pieces.xi_varpi_term = (ns.p11 / nsb.p11) * xi_varpi;
  pieces.strata_mix_term =
      (ns.p01 / nsb.p01 - ns.p11 / nsb.p11) * strata_mix;
  pieces.theta_shift_term =
      (1.0 - ns.p01 / nsb.p01) * (rep.theta_pbar - rep.theta_p);
  pieces.s2_residual = rep.remainder_identity - pieces.xi_varpi_term -
                       pieces.strata_mix_term - pieces.theta_shift_term;
  rep.binary_pieces = pieces;
  return rep;
}

double influence_mean_general(const TabularLaw& p) {
  ObservedView v(p);
  NuisanceSet ns = nuisances_from_law(p);
  double theta = theta_prop1(p);
  double total = 0.0;
  for_each_cell(v, v, [&](int r1, int r2, std::size_t yi, std::size_t xi,
                          double mass, double /*mq*/) {
    if (mass == 0.0) return;
    total += mass * phi_general_cell(v, ns, theta, ns.p01, r1, r2, yi, xi);
  });
  return total;
}

double influence_mean_binary(const TabularLaw& p, double rho) {
  ObservedView v(p);
  NuisanceSet ns = nuisances_from_law(p);
  double theta = theta_binary_known_rho(p, rho);
  double total = 0.0;
  for_each_cell(v, v, [&](int r1, int r2, std::size_t yi, std::size_t xi,
                          double mass, double /*mq*/) {
    if (mass == 0.0) return;
    total += mass * phi_binary_cell(v, ns, rho, theta, ns.p11, ns.p01, r1, r2,
                                    yi, xi);
  });
  return total;
}

namespace {

void check_halving(const std::vector<double>& epsilons) {
  require(!epsilons.empty(), Errc::EpsilonOutOfRange, "no epsilons supplied");
  for (double e : epsilons)
    require(e > 0.0 && e <= 1.0, Errc::EpsilonOutOfRange,
            "epsilon must lie in (0,1]");
  for (std::size_t i = 0; i + 1 < epsilons.size(); ++i)
    require(std::abs(epsilons[i + 1] - 0.5 * epsilons[i]) <= 1e-12,
            Errc::EpsilonOutOfRange, "epsilons must halve");
}

DecayReport scan_impl(
    const TabularLaw& p, const TabularLaw& pbar,
    const std::vector<double>& epsilons,
    const std::function<std::pair<double, double>(const TabularLaw&)>& eval) {
  check_halving(epsilons);
  DecayReport out;
  out.epsilons = epsilons;
  for (double eps : epsilons) {
    TabularLaw path = mix(p, pbar, eps);
    auto [rem, ifint] = eval(path);
    out.remainders.push_back(rem);
    out.if_integrals.push_back(ifint);
  }
  // A remainder at rounding scale counts as zero; a path from a law to
  // itself reports no ratios at all.
  constexpr double kZero = 1e-14;
  bool all_zero = true;
  for (double r : out.remainders) all_zero = all_zero && std::abs(r) <= kZero;
  if (!all_zero) {
    for (std::size_t i = 0; i + 1 < out.remainders.size(); ++i)
      out.decay_ratios.push_back(
          std::abs(out.remainders[i]) <= kZero
              ? std::numeric_limits<double>::quiet_NaN()
              : out.remainders[i + 1] / out.remainders[i]);
  }
  for (std::size_t i = 0; i + 1 < out.if_integrals.size(); ++i) {
    double a = out.if_integrals[i] / epsilons[i];
    double b = out.if_integrals[i + 1] / epsilons[i + 1];
    out.if_over_eps_ratios.push_back(
        a == 0.0 ? std::numeric_limits<double>::quiet_NaN() : b / a);
  }
  return out;
}

}  // namespace

DecayReport second_order_scan(const TabularLaw& p, const TabularLaw& pbar,
                              const std::vector<double>& epsilons) {
  return scan_impl(p, pbar, epsilons, [&](const TabularLaw& path) {
    ExpansionReport rep = expansion_check(p, path);
    return std::pair<double, double>{rep.remainder_identity, rep.if_integral};
  });
}

DecayReport second_order_scan_binary(const TabularLaw& p,
                                     const TabularLaw& pbar, double rho,
                                     const std::vector<double>& epsilons) {
  return scan_impl(p, pbar, epsilons, [&](const TabularLaw& path) {
    ExpansionReport rep = expansion_check_binary(p, path, rho);
    return std::pair<double, double>{rep.binary_pieces->s2_residual, rep.if_integral};
  });
}

}  // namespace mnar
