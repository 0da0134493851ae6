#include "mnar/perm_model.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mnar/rng.hpp"

namespace mnar {

namespace {

void check_prob(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0))
    fail(Errc::RangeViolation, what + " outside [0,1]");
}

std::size_t pick(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace

void PermutationLaw::validate() const {
  require(!y_support.empty() && !x_support.empty(), Errc::SupportMismatch,
          "empty support");
  require(p_y1.size() == y_support.size(), Errc::SupportMismatch,
          "p_y1 length mismatch");
  require(p_x1_given_y1.size() == y_support.size(), Errc::SupportMismatch,
          "p_x1_given_y1 row count mismatch");
  require(p_r1_given_x1.size() == x_support.size(), Errc::SupportMismatch,
          "p_r1_given_x1 length mismatch");
  require(zeta.size() == y_support.size(), Errc::SupportMismatch,
          "zeta length mismatch");

  for (const auto& label : y_support) label_number(label);  // must be numeric

  double total = 0.0;
  for (double p : p_y1) {
    check_prob(p, "p_y1 entry");
    total += p;
  }
  require(std::abs(total - 1.0) <= TabularLaw::kNormTol, Errc::UnnormalizedFactor,
          "p_y1 does not sum to 1");
  for (const auto& row : p_x1_given_y1) {
    require(row.size() == x_support.size(), Errc::SupportMismatch,
            "p_x1_given_y1 row length mismatch");
    double row_total = 0.0;
    for (double p : row) {
      check_prob(p, "p_x1_given_y1 entry");
      row_total += p;
    }
    require(std::abs(row_total - 1.0) <= TabularLaw::kNormTol,
            Errc::UnnormalizedFactor, "p_x1_given_y1 row does not sum to 1");
  }
  for (double p : p_r1_given_x1) check_prob(p, "p_r1_given_x1 entry");
  for (double z : zeta) {
    check_prob(z, "zeta entry");
    require(z > 0.0, Errc::PositivityViolation, "zeta must be positive");
  }
  check_prob(q0, "q0");
  require(q0 > 0.0, Errc::PositivityViolation, "q0 must be positive");
}

TabularLaw full_law(const PermutationLaw& m) {
  m.validate();
  const std::vector<std::string> binary = {"0", "1"};
  std::vector<Variable> vars = {{"Y1", m.y_support},
                                {"X1", m.x_support},
                                {"R1", binary},
                                {"R2", binary}};
  const std::size_t ny = m.y_support.size(), nx = m.x_support.size();
  std::vector<double> probs;
  probs.reserve(ny * nx * 4);
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x)
      for (int r1 = 0; r1 <= 1; ++r1)
        for (int r2 = 0; r2 <= 1; ++r2) {
          double p = m.p_y1[y] * m.p_x1_given_y1[y][x];
          p *= r1 == 1 ? m.p_r1_given_x1[x] : 1.0 - m.p_r1_given_x1[x];
          double p2 = r1 == 1 ? m.zeta[y] : m.q0;
          p *= r2 == 1 ? p2 : 1.0 - p2;
          probs.push_back(p);
        }
  return TabularLaw(std::move(vars), std::move(probs));
}

TabularLaw observed_law(const PermutationLaw& m) {
  TabularLaw full = full_law(m);
  const std::vector<std::string> binary = {"0", "1"};
  std::vector<std::string> y_obs = m.y_support;
  y_obs.push_back(missing_token());
  std::vector<std::string> x_obs = m.x_support;
  x_obs.push_back(missing_token());
  std::vector<Variable> vars = {
      {"R1", binary}, {"R2", binary}, {"Y", y_obs}, {"X", x_obs}};

  const std::size_t ny = y_obs.size(), nx = x_obs.size();
  std::vector<double> probs(2 * 2 * ny * nx, 0.0);
  const std::size_t y1v = full.var_index("Y1"), x1v = full.var_index("X1");
  const std::size_t r1v = full.var_index("R1"), r2v = full.var_index("R2");
  for (std::size_t cell = 0; cell < full.n_cells(); ++cell) {
    auto idx = full.indices_of(cell);
    std::size_t r1 = idx[r1v], r2 = idx[r2v];
    std::size_t yi = r1 == 1 ? idx[y1v] : ny - 1;
    std::size_t xi = r2 == 1 ? idx[x1v] : nx - 1;
    probs[((r1 * 2 + r2) * ny + yi) * nx + xi] += full.prob_cell(cell);
  }
  return TabularLaw(std::move(vars), std::move(probs));
}

Dataset sample(const PermutationLaw& m, std::size_t n, std::uint64_t seed) {
  m.validate();
  require(n >= 1, Errc::RangeViolation, "sample size must be positive");
  Dataset d;
  d.seed = seed;
  d.generator = generator_id();
  d.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng = substream(seed, i);
    std::size_t y = pick(m.p_y1, rng.uniform01());
    std::size_t x = pick(m.p_x1_given_y1[y], rng.uniform01());
    int r1 = rng.uniform01() < m.p_r1_given_x1[x] ? 1 : 0;
    double p2 = r1 == 1 ? m.zeta[y] : m.q0;
    int r2 = rng.uniform01() < p2 ? 1 : 0;
    ObservedRecord rec;
    rec.r1 = r1;
    rec.r2 = r2;
    rec.y = r1 == 1 ? m.y_support[y] : missing_token();
    rec.x = r2 == 1 ? m.x_support[x] : missing_token();
    d.records.push_back(std::move(rec));
  }
  return d;
}

double true_psi(const PermutationLaw& m) {
  TabularLaw full = full_law(m);
  return expectation(full, [](const Cell& c) { return c.numeric("Y1"); });
}

double true_theta(const PermutationLaw& m) {
  TabularLaw full = full_law(m);
  TabularLaw stratum = condition(full, {{"R1", "0"}});
  return expectation(stratum, [](const Cell& c) { return c.numeric("Y1"); });
}

std::string permutation_law_to_json(const PermutationLaw& m) {
  nlohmann::json j;
  j["y1_support"] = m.y_support;
  j["x1_support"] = m.x_support;
  j["p_y1"] = m.p_y1;
  j["p_x1_given_y1"] = m.p_x1_given_y1;
  j["p_r1_given_x1"] = m.p_r1_given_x1;
  j["zeta"] = m.zeta;
  j["q0"] = m.q0;
  return j.dump(2);
}

PermutationLaw permutation_law_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("permutation law JSON: ") + e.what());
  }
  PermutationLaw m;
  try {
    m.y_support = j.at("y1_support").get<std::vector<std::string>>();
    m.x_support = j.at("x1_support").get<std::vector<std::string>>();
    m.p_y1 = j.at("p_y1").get<std::vector<double>>();
    m.p_x1_given_y1 =
        j.at("p_x1_given_y1").get<std::vector<std::vector<double>>>();
    m.p_r1_given_x1 = j.at("p_r1_given_x1").get<std::vector<double>>();
    m.zeta = j.at("zeta").get<std::vector<double>>();
    m.q0 = j.at("q0").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("permutation law JSON: ") + e.what());
  }
  m.validate();
  return m;
}

void write_dataset_csv(const Dataset& d, std::ostream& out) {
  out << "r1,r2,y,x\n";
  for (const auto& rec : d.records)
    out << rec.r1 << ',' << rec.r2 << ',' << rec.y << ',' << rec.x << '\n';
}

Dataset read_dataset_csv(std::istream& in) {
  Dataset d;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "r1,r2,y,x")
        fail(Errc::ParseError, "dataset CSV: bad header: " + line);
      continue;
    }
    std::istringstream ls(line);
    std::string f[4];
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(ls, f[i], i < 3 ? ',' : '\n'))
        fail(Errc::ParseError,
             "dataset CSV line " + std::to_string(lineno) + ": expected 4 fields");
    }
    ObservedRecord rec;
    if (f[0] != "0" && f[0] != "1")
      fail(Errc::ParseError,
           "dataset CSV line " + std::to_string(lineno) + ": bad r1 " + f[0]);
    if (f[1] != "0" && f[1] != "1")
      fail(Errc::ParseError,
           "dataset CSV line " + std::to_string(lineno) + ": bad r2 " + f[1]);
    rec.r1 = f[0] == "1" ? 1 : 0;
    rec.r2 = f[1] == "1" ? 1 : 0;
    rec.y = f[2];
    rec.x = f[3];
    if ((rec.y == missing_token()) != (rec.r1 == 0))
      fail(Errc::ParseError, "dataset CSV line " + std::to_string(lineno) +
                                 ": y must be ? exactly when r1=0");
    if ((rec.x == missing_token()) != (rec.r2 == 0))
      fail(Errc::ParseError, "dataset CSV line " + std::to_string(lineno) +
                                 ": x must be ? exactly when r2=0");
    d.records.push_back(std::move(rec));
  }
  return d;
}

}  // namespace mnar
