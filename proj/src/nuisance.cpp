#include "mnar/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "observed_view.hpp"

namespace mnar {

using detail::ObservedView;

double NuisanceSet::at(const std::map<std::string, double>& table,
                       const std::string& label, const char* name) {
  auto it = table.find(label);
  if (it == table.end())
    fail(Errc::UnknownLabel,
         std::string(name) + " has no entry for label " + label);
  return it->second;
}

NuisanceSet nuisances_from_law(const TabularLaw& obs) {
  ObservedView v(obs);
  NuisanceSet ns;
  ns.p11 = v.stratum(1, 1);
  ns.p01 = v.stratum(0, 1);
  ns.p1 = v.p_r1(1);

  std::vector<std::size_t> y_dom, x_dom;
  for (std::size_t yi = 0; yi < v.ny(); ++yi)
    if (v.p_y_r1(yi) > 0.0) y_dom.push_back(yi);
  for (std::size_t xi = 0; xi < v.nx(); ++xi)
    if (v.p_r2_x(xi) > 0.0) x_dom.push_back(xi);

  for (std::size_t yi : y_dom) ns.zeta[v.y_label(yi)] = v.zeta(yi);

  for (std::size_t xi : x_dom) {
    double p11x = v.p_11_x(xi);
    if (p11x <= 0.0)
      fail(Errc::PositivityViolation,
           "P(R1=1, R2=1, X=" + v.x_label(xi) + ") is zero");
    double a = 0.0, b = 0.0;
    for (std::size_t yi : y_dom) {
      double w = v.p(1, 1, yi, xi) / p11x / ns.zeta_at(v.y_label(yi));
      a += w;
      b += v.y_value(yi) * w;
    }
    ns.alpha[v.x_label(xi)] = a;
    ns.beta[v.x_label(xi)] = b;
    ns.gamma[v.x_label(xi)] = p11x / v.p_r2_x(xi);
  }

  // delta references beta/alpha and gamma, so it comes last.
  for (std::size_t yi : y_dom) {
    double p11y = v.p_11_y(yi);
    if (p11y <= 0.0)
      fail(Errc::PositivityViolation,
           "P(R1=1, R2=1, Y=" + v.y_label(yi) + ") is zero");
    double total = 0.0;
    for (std::size_t xi : x_dom) {
      double w = v.p(1, 1, yi, xi) / p11y;
      if (w <= 0.0) continue;
      const std::string& x = v.x_label(xi);
      double g = ns.gamma_at(x);
      total += w * (1.0 / ns.alpha_at(x)) * ((1.0 - g) / g) *
               (v.y_value(yi) - ns.m_at(x));
    }
    ns.delta[v.y_label(yi)] = total;
  }

  if (v.y_binary()) {
    ns.y_binary = true;
    if (ns.p01 <= 0.0)
      fail(Errc::PositivityViolation,
           "binary nuisances need positive P(R1=0, R2=1)");
    double o11_1 = 0.0, o11_0 = 0.0, o1_1 = 0.0, o1_0 = 0.0;
    for (std::size_t yi : y_dom) {
      if (v.y_value(yi) == 1.0) {
        o11_1 += v.p_11_y(yi);
        o1_1 += v.p_y_r1(yi);
      } else {
        o11_0 += v.p_11_y(yi);
        o1_0 += v.p_y_r1(yi);
      }
    }
    if (o11_1 <= 0.0 || o11_0 <= 0.0 || o1_1 <= 0.0 || o1_0 <= 0.0)
      fail(Errc::DegenerateOdds, "odds of Y=1 degenerate in a stratum");
    ns.rho = (o11_1 / o11_0) / (o1_1 / o1_0);

    for (std::size_t xi : x_dom) {
      const std::string& x = v.x_label(xi);
      double p1 = 0.0, p0 = 0.0;
      for (std::size_t yi : y_dom)
        (v.y_value(yi) == 1.0 ? p1 : p0) += v.p(1, 1, yi, xi);
      double m = p1 / (p1 + p0);
      if (m <= 0.0 || m >= 1.0)
        fail(Errc::DegenerateOdds,
             "P(Y=1 | X=" + x + ", R1=R2=1) is degenerate");
      ns.mu[x] = m;
      ns.xi[x] = m / (1.0 - m);
      ns.varpi[x] = (v.p_01_x(xi) / ns.p01) / ((p1 + p0) / ns.p11);
    }
  }
  return ns;
}

namespace {

struct LabelLess {
  // Numeric labels sort numerically so supports are stable across runs.
  bool operator()(const std::string& a, const std::string& b) const {
    char* ea = nullptr;
    char* eb = nullptr;
    double va = std::strtod(a.c_str(), &ea);
    double vb = std::strtod(b.c_str(), &eb);
    bool na = ea != a.c_str() && *ea == '\0';
    bool nb = eb != b.c_str() && *eb == '\0';
    if (na && nb && va != vb) return va < vb;
    return a < b;
  }
};

class Clipper {
 public:
  Clipper(double floor, long long& events) : floor_(floor), events_(events) {}
  double operator()(double p) const {
    if (p < floor_) {
      ++events_;
      return floor_;
    }
    if (p > 1.0 - floor_) {
      ++events_;
      return 1.0 - floor_;
    }
    return p;
  }

 private:
  double floor_;
  long long& events_;
};

}  // namespace

NuisanceSet fit_nuisances(const Dataset& d, const FitConfig& config) {
  require(!d.records.empty(), Errc::EmptyStratum, "dataset is empty");
  require(config.pseudo_count >= 0.0, Errc::RangeViolation,
          "pseudo count must be nonnegative");
  const double c = config.pseudo_count;
  const bool smoothing = c > 0.0;

  std::set<std::string, LabelLess> y_set, x_set;
  for (const auto& rec : d.records) {
    if (rec.r1 == 1) y_set.insert(rec.y);
    if (rec.r2 == 1) x_set.insert(rec.x);
  }
  std::vector<std::string> ys(y_set.begin(), y_set.end());
  std::vector<std::string> xs(x_set.begin(), x_set.end());
  require(!ys.empty(), Errc::EmptyStratum, "no records with R1=1");
  require(!xs.empty(), Errc::EmptyStratum, "no records with R2=1");
  std::vector<double> y_vals;
  for (const auto& y : ys) y_vals.push_back(label_number(y));

  auto y_index = [&](const std::string& y) {
    return std::lower_bound(ys.begin(), ys.end(), y, LabelLess{}) - ys.begin();
  };
  auto x_index = [&](const std::string& x) {
    return std::lower_bound(xs.begin(), xs.end(), x, LabelLess{}) - xs.begin();
  };

  const std::size_t ny = ys.size(), nx = xs.size();
  std::vector<long long> n_1y(ny, 0), n_11y(ny, 0);
  std::vector<long long> n_r2x(nx, 0), n_11x(nx, 0), n_01x(nx, 0);
  std::vector<long long> n_11yx(ny * nx, 0);
  long long n_1 = 0, n_11 = 0, n_01 = 0;
  for (const auto& rec : d.records) {
    if (rec.r1 == 1) {
      ++n_1;
      std::size_t yi = y_index(rec.y);
      ++n_1y[yi];
      if (rec.r2 == 1) {
        ++n_11;
        ++n_11y[yi];
        std::size_t xi = x_index(rec.x);
        ++n_11x[xi];
        ++n_11yx[yi * nx + xi];
      }
    } else if (rec.r2 == 1) {
      ++n_01;
      ++n_01x[x_index(rec.x)];
    }
    if (rec.r2 == 1) ++n_r2x[x_index(rec.x)];
  }

  NuisanceSet ns;
  const double n = static_cast<double>(d.records.size());
  ns.p11 = n_11 / n;
  ns.p01 = n_01 / n;
  ns.p1 = n_1 / n;
  Clipper clip(config.clip_floor, ns.clip_events);

  if (!smoothing) {
    require(n_11 > 0, Errc::EmptyStratum, "no records in the R1=1,R2=1 stratum");
    require(n_01 > 0, Errc::EmptyStratum, "no records in the R1=0,R2=1 stratum");
    for (std::size_t xi = 0; xi < nx; ++xi)
      require(n_11x[xi] > 0, Errc::EmptyStratum,
              "conditional table P(y | R1=1, R2=1, X=" + xs[xi] +
                  ") has an empty stratum");
    for (std::size_t yi = 0; yi < ny; ++yi)
      require(n_11y[yi] > 0, Errc::EmptyStratum,
              "delta cell Y=" + ys[yi] + " has no R1=1,R2=1 records");
  }

  for (std::size_t yi = 0; yi < ny; ++yi) {
    ns.zeta[ys[yi]] = clip((n_11y[yi] + c) / (n_1y[yi] + 2.0 * c));
    ns.cell_counts["zeta"][ys[yi]] = n_1y[yi];
  }

  // P(y | R1=1, R2=1, X=x) drives alpha and beta.
  for (std::size_t xi = 0; xi < nx; ++xi) {
    const std::string& x = xs[xi];
    double a = 0.0, b = 0.0;
    for (std::size_t yi = 0; yi < ny; ++yi) {
      double pyx = (n_11yx[yi * nx + xi] + c) / (n_11x[xi] + ny * c);
      double w = pyx / ns.zeta_at(ys[yi]);
      a += w;
      b += y_vals[yi] * w;
    }
    ns.alpha[x] = a;
    ns.beta[x] = b;
    ns.gamma[x] = clip((n_11x[xi] + c) / (n_r2x[xi] + 2.0 * c));
    ns.cell_counts["alpha"][x] = n_11x[xi];
    ns.cell_counts["gamma"][x] = n_r2x[xi];
  }

  // delta: frequency regression of the plug-in pseudo-outcome on Y within
  // the complete stratum; empty cells fall back to 0 under smoothing.
  // Accumulated over cells in support order, so record order cannot move
  // the floating-point result.
  for (std::size_t yi = 0; yi < ny; ++yi) {
    double num = 0.0;
    for (std::size_t xi = 0; xi < nx; ++xi) {
      long long count = n_11yx[yi * nx + xi];
      if (count == 0) continue;
      double g = ns.gamma_at(xs[xi]);
      num += static_cast<double>(count) * (1.0 / ns.alpha_at(xs[xi])) *
             ((1.0 - g) / g) * (y_vals[yi] - ns.m_at(xs[xi]));
    }
    ns.delta[ys[yi]] = n_11y[yi] > 0 ? num / n_11y[yi] : 0.0;
    ns.cell_counts["delta"][ys[yi]] = n_11y[yi];
  }

  bool binary = ny == 2 && ((y_vals[0] == 0.0 && y_vals[1] == 1.0) ||
                            (y_vals[0] == 1.0 && y_vals[1] == 0.0));
  if (binary) {
    ns.y_binary = true;
    std::size_t one = y_vals[0] == 1.0 ? 0 : 1;
    double p11_1 = clip((n_11y[one] + c) / (n_11 + 2.0 * c));
    double p1_1 = clip((n_1y[one] + c) / (n_1 + 2.0 * c));
    if (p11_1 <= 0.0 || p11_1 >= 1.0 || p1_1 <= 0.0 || p1_1 >= 1.0)
      fail(Errc::DegenerateOdds, "fitted odds of Y=1 degenerate");
    ns.rho = (p11_1 / (1.0 - p11_1)) / (p1_1 / (1.0 - p1_1));
    for (std::size_t xi = 0; xi < nx; ++xi) {
      const std::string& x = xs[xi];
      double m = clip((n_11yx[one * nx + xi] + c) / (n_11x[xi] + 2.0 * c));
      ns.mu[x] = m;
      ns.xi[x] = m / (1.0 - m);
      double p_x_01 = (n_01x[xi] + c) / (n_01 + nx * c);
      double p_x_11 = (n_11x[xi] + c) / (n_11 + nx * c);
      if (p_x_11 <= 0.0)
        fail(Errc::EmptyStratum, "varpi denominator empty at X=" + x);
      ns.varpi[x] = p_x_01 / p_x_11;
      ns.cell_counts["mu"][x] = n_11x[xi];
      ns.cell_counts["varpi"][x] = n_01x[xi];
    }
  }
  return ns;
}

namespace {

double logit_bump(double p, double shift) {
  if (p <= 0.0 || p >= 1.0) return p;  // degenerate cells stay put
  double odds = p / (1.0 - p) * std::exp(shift);
  return odds / (1.0 + odds);
}

void bump_table(std::map<std::string, double>& table, const std::string& name,
                double shift, const std::optional<std::string>& cell,
                const std::function<double(double, double)>& rule) {
  if (cell) {
    auto it = table.find(*cell);
    if (it == table.end())
      fail(Errc::UnknownLabel, name + " has no cell " + *cell);
    it->second = rule(it->second, shift);
    return;
  }
  for (auto& [label, value] : table) value = rule(value, shift);
}

}  // namespace

NuisanceSet perturb(const NuisanceSet& ns, double eps, const BumpSpec& spec) {
  NuisanceSet out = ns;
  auto logit_rule = [](double p, double s) { return logit_bump(p, s); };
  auto scale_rule = [](double v, double s) { return v * std::exp(s); };
  auto alpha_rule = [](double a, double s) {
    return 1.0 + (a - 1.0) * std::exp(s);
  };

  bool mu_touched = false;
  for (const auto& item : spec.items) {
    double shift = eps * item.sign;
    if (item.nuisance == "zeta")
      bump_table(out.zeta, "zeta", shift, item.cell, logit_rule);
    else if (item.nuisance == "gamma")
      bump_table(out.gamma, "gamma", shift, item.cell, logit_rule);
    else if (item.nuisance == "mu") {
      bump_table(out.mu, "mu", shift, item.cell, logit_rule);
      mu_touched = true;
    } else if (item.nuisance == "alpha")
      bump_table(out.alpha, "alpha", shift, item.cell, alpha_rule);
    else if (item.nuisance == "beta")
      bump_table(out.beta, "beta", shift, item.cell, scale_rule);
    else if (item.nuisance == "delta")
      bump_table(out.delta, "delta", shift, item.cell, scale_rule);
    else if (item.nuisance == "varpi")
      bump_table(out.varpi, "varpi", shift, item.cell, scale_rule);
    else if (item.nuisance == "rho") {
      if (!out.rho) fail(Errc::UnknownLabel, "rho is absent (Y not binary)");
      out.rho = *out.rho * std::exp(shift);
    } else if (item.nuisance == "xi")
      fail(Errc::UnknownLabel, "xi is derived from mu; bump mu instead");
    else
      fail(Errc::UnknownLabel, "unknown nuisance " + item.nuisance);
  }

  if (mu_touched) {
    for (const auto& [x, m] : out.mu) {
      if (m <= 0.0 || m >= 1.0)
        fail(Errc::RangeViolation, "perturbed mu out of (0,1) at X=" + x);
      out.xi[x] = m / (1.0 - m);
    }
  }
  for (const auto& [x, a] : out.alpha)
    if (a < 1.0)
      fail(Errc::RangeViolation, "perturbed alpha below 1 at X=" + x);
  return out;
}

double phi_general(const NuisanceSet& ns, double theta, double p01, int r1,
                   int r2, const std::string& y, const std::string& x) {
  if (p01 <= 0.0)
    fail(Errc::EmptyStratum, "P(R1=0, R2=1) must be positive");
  double value = 0.0;
  if (r1 == 0 && r2 == 1) value += ns.m_at(x) - theta;
  if (r1 == 1) {
    double z = ns.zeta_at(y);
    if (z <= 0.0) fail(Errc::RangeViolation, "zeta must be positive");
    if (r2 == 1) {
      double g = ns.gamma_at(x);
      if (g <= 0.0) fail(Errc::RangeViolation, "gamma must be positive");
      value += (1.0 / ns.alpha_at(x)) * (1.0 / z) * ((1.0 - g) / g) *
               (label_number(y) - ns.m_at(x));
    }
    value -= ((r2 == 1 ? 1.0 / z : 0.0) - 1.0) * ns.delta_at(y);
  }
  return value / p01;
}

double phi_binary(const NuisanceSet& ns, double rho, double theta, double p11,
                  double p01, int r1, int r2, const std::string& y,
                  const std::string& x) {
  if (!ns.y_binary) fail(Errc::NotBinaryOutcome, "Y is not binary");
  if (!(rho > 0.0)) fail(Errc::DegenerateOdds, "rho must be positive");
  double value = 0.0;
  if (r1 == 1 && r2 == 1) {
    if (p11 <= 0.0) fail(Errc::EmptyStratum, "P(R1=1, R2=1) must be positive");
    double xv = ns.xi_at(x);
    double w = (1.0 + xv) / (rho + xv);
    value += rho * w * w * ns.varpi_at(x) * (label_number(y) - xv / (1.0 + xv)) /
             p11;
  }
  if (r1 == 0 && r2 == 1) {
    if (p01 <= 0.0) fail(Errc::EmptyStratum, "P(R1=0, R2=1) must be positive");
    double xv = ns.xi_at(x);
    value += (xv / (rho + xv) - theta) / p01;
  }
  return value;
}

std::string nuisances_to_json(const NuisanceSet& ns) {
  nlohmann::json j;
  auto table = [](const std::map<std::string, double>& t) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : t) out[k] = v;
    return out;
  };
  j["zeta"] = table(ns.zeta);
  j["alpha"] = table(ns.alpha);
  j["beta"] = table(ns.beta);
  j["gamma"] = table(ns.gamma);
  j["delta"] = table(ns.delta);
  if (ns.y_binary) {
    j["mu"] = table(ns.mu);
    j["xi"] = table(ns.xi);
    j["varpi"] = table(ns.varpi);
    j["rho"] = *ns.rho;
  }
  j["strata"] = {{"p11", ns.p11}, {"p01", ns.p01}, {"p1", ns.p1}};
  j["y_binary"] = ns.y_binary;
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [name, cells] : ns.cell_counts) counts[name] = table(
      std::map<std::string, double>(cells.begin(), cells.end()));
  j["cell_counts"] = counts;
  j["clip_events"] = ns.clip_events;
  return j.dump(2);
}

}  // namespace mnar
