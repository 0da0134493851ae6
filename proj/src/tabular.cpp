#include "mnar/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include <json.hpp>

namespace mnar {

namespace {

void check_disjoint(const std::vector<std::string>& a,
                    const std::vector<std::string>& b) {
  for (const auto& x : a)
    for (const auto& y : b)
      if (x == y) fail(Errc::OverlappingSets, "variable in two sets: " + x);
}

}  // namespace

TabularLaw::TabularLaw(std::vector<Variable> variables,
                       std::vector<double> probabilities)
    : variables_(std::move(variables)), probabilities_(std::move(probabilities)) {
  std::set<std::string> seen;
  std::size_t cells = 1;
  for (const auto& v : variables_) {
    if (!seen.insert(v.name).second)
      fail(Errc::DuplicateName, "duplicate variable: " + v.name);
    if (v.support.empty())
      fail(Errc::SupportMismatch, "empty support for variable: " + v.name);
    std::set<std::string> labels(v.support.begin(), v.support.end());
    if (labels.size() != v.support.size())
      fail(Errc::DuplicateName, "duplicate label in support of " + v.name);
    if (cells > kMaxCells / v.support.size())
      fail(Errc::SupportTooLarge, "joint support exceeds cell limit");
    cells *= v.support.size();
  }
  if (probabilities_.size() != cells)
    fail(Errc::SupportMismatch, "probability vector has wrong length");

  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0))
      fail(Errc::UnnormalizedLaw, "negative or NaN cell probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kNormTol)
    fail(Errc::UnnormalizedLaw, "cell probabilities sum to " + std::to_string(total));

  strides_.assign(variables_.size(), 1);
  for (std::size_t i = variables_.size(); i-- > 1;)
    strides_[i - 1] = strides_[i] * variables_[i].support.size();
}

std::size_t TabularLaw::var_index(const std::string& name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].name == name) return i;
  fail(Errc::UnknownVariable, "no variable named " + name);
}

bool TabularLaw::has_variable(const std::string& name) const {
  for (const auto& v : variables_)
    if (v.name == name) return true;
  return false;
}

std::size_t TabularLaw::label_index(std::size_t var, const std::string& label) const {
  const auto& support = variables_[var].support;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (support[i] == label) return i;
  fail(Errc::UnknownLabel,
       "label " + label + " not in support of " + variables_[var].name);
}

std::size_t TabularLaw::cell_of(const std::vector<std::size_t>& indices) const {
  std::size_t cell = 0;
  for (std::size_t i = 0; i < indices.size(); ++i) cell += indices[i] * strides_[i];
  return cell;
}

std::vector<std::size_t> TabularLaw::indices_of(std::size_t cell) const {
  std::vector<std::size_t> indices(variables_.size());
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    indices[i] = cell / strides_[i];
    cell %= strides_[i];
  }
  return indices;
}

TabularLaw law_from_factors(const std::vector<ConditionalFactor>& factors) {
  std::vector<Variable> vars;
  std::vector<std::size_t> var_pos;  // position of each factor's variable
  for (const auto& f : factors) {
    for (const auto& g : f.given) {
      bool found = false;
      for (const auto& v : vars) found = found || v.name == g;
      if (!found)
        fail(Errc::BadTopologicalOrder,
             "factor for " + f.var + " conditions on later/unknown variable " + g);
    }
    vars.push_back({f.var, f.support});
  }

  // Validate each conditional slice.
  for (const auto& f : factors) {
    std::size_t rows = 1;
    for (const auto& g : f.given) {
      for (const auto& v : vars)
        if (v.name == g) rows *= v.support.size();
    }
    const std::size_t k = f.support.size();
    if (f.probs.size() != rows * k)
      fail(Errc::SupportMismatch, "factor table for " + f.var + " has wrong size");
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        double p = f.probs[r * k + j];
        if (!(p >= 0.0))
          fail(Errc::UnnormalizedFactor, "negative entry in factor for " + f.var);
        total += p;
      }
      if (std::abs(total - 1.0) > TabularLaw::kNormTol)
        fail(Errc::UnnormalizedFactor,
             "conditional slice for " + f.var + " sums to " + std::to_string(total));
    }
  }

  // Dense product in one pass over joint cells.
  std::size_t cells = 1;
  for (const auto& v : vars) {
    if (cells > TabularLaw::kMaxCells / v.support.size())
      fail(Errc::SupportTooLarge, "joint support exceeds cell limit");
    cells *= v.support.size();
  }

  // Per-factor index maps: which joint coordinates feed each factor row.
  std::vector<std::vector<std::size_t>> parent_pos(factors.size());
  for (std::size_t fi = 0; fi < factors.size(); ++fi) {
    for (const auto& g : factors[fi].given) {
      for (std::size_t vi = 0; vi < vars.size(); ++vi)
        if (vars[vi].name == g) parent_pos[fi].push_back(vi);
    }
  }

  std::vector<std::size_t> idx(vars.size(), 0);
  std::vector<double> probs(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double p = 1.0;
    for (std::size_t fi = 0; fi < factors.size(); ++fi) {
      std::size_t row = 0;
      for (std::size_t pp : parent_pos[fi]) {
        const auto& parent_var = vars[pp];
        row = row * parent_var.support.size() + idx[pp];
      }
      p *= factors[fi].probs[row * factors[fi].support.size() + idx[fi]];
    }
    probs[cell] = p;
    for (std::size_t i = vars.size(); i-- > 0;) {
      if (++idx[i] < vars[i].support.size()) break;
      idx[i] = 0;
    }
  }
  return TabularLaw(std::move(vars), std::move(probs));
}

TabularLaw marginal(const TabularLaw& law, const std::vector<std::string>& vars) {
  std::vector<std::size_t> keep;
  for (const auto& name : vars) keep.push_back(law.var_index(name));
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());

  std::vector<Variable> out_vars;
  for (std::size_t i : keep) out_vars.push_back(law.variables()[i]);

  std::size_t out_cells = 1;
  for (const auto& v : out_vars) out_cells *= v.support.size();
  std::vector<double> out(out_cells, 0.0);

  for (std::size_t cell = 0; cell < law.n_cells(); ++cell) {
    auto idx = law.indices_of(cell);
    std::size_t out_cell = 0;
    for (std::size_t i : keep) {
      out_cell = out_cell * law.variables()[i].support.size() + idx[i];
    }
    out[out_cell] += law.prob_cell(cell);
  }
  return TabularLaw(std::move(out_vars), std::move(out));
}

double event_prob(const TabularLaw& law, const Event& event) {
  std::vector<std::pair<std::size_t, std::size_t>> fixed;  // (var, label index)
  for (const auto& [name, label] : event) {
    std::size_t vi = law.var_index(name);
    fixed.emplace_back(vi, law.label_index(vi, label));
  }
  double total = 0.0;
  for (std::size_t cell = 0; cell < law.n_cells(); ++cell) {
    auto idx = law.indices_of(cell);
    bool match = true;
    for (auto [vi, li] : fixed) match = match && idx[vi] == li;
    if (match) total += law.prob_cell(cell);
  }
  return total;
}

TabularLaw condition(const TabularLaw& law, const Event& event) {
  double mass = event_prob(law, event);
  if (mass <= 0.0) {
    std::string desc;
    for (const auto& [name, label] : event) desc += name + "=" + label + " ";
    fail(Errc::ZeroProbabilityEvent, "conditioning event has zero mass: " + desc);
  }

  std::vector<std::pair<std::size_t, std::size_t>> fixed;
  for (const auto& [name, label] : event) {
    std::size_t vi = law.var_index(name);
    fixed.emplace_back(vi, law.label_index(vi, label));
  }
  std::vector<bool> is_fixed(law.n_variables(), false);
  for (auto [vi, li] : fixed) is_fixed[vi] = true;

  std::vector<Variable> out_vars;
  for (std::size_t i = 0; i < law.n_variables(); ++i)
    if (!is_fixed[i]) out_vars.push_back(law.variables()[i]);
  if (out_vars.empty())
    fail(Errc::UnknownVariable, "conditioning on every variable leaves no law");

  std::size_t out_cells = 1;
  for (const auto& v : out_vars) out_cells *= v.support.size();
  std::vector<double> out(out_cells, 0.0);

  for (std::size_t cell = 0; cell < law.n_cells(); ++cell) {
    auto idx = law.indices_of(cell);
    bool match = true;
    for (auto [vi, li] : fixed) match = match && idx[vi] == li;
    if (!match) continue;
    std::size_t out_cell = 0;
    for (std::size_t i = 0; i < law.n_variables(); ++i)
      if (!is_fixed[i])
        out_cell = out_cell * law.variables()[i].support.size() + idx[i];
    out[out_cell] += law.prob_cell(cell) / mass;
  }
  return TabularLaw(std::move(out_vars), std::move(out));
}

const std::string& Cell::label(const std::string& var) const {
  std::size_t vi = law_->var_index(var);
  return law_->variables()[vi].support[(*indices_)[vi]];
}

std::size_t Cell::index(const std::string& var) const {
  return (*indices_)[law_->var_index(var)];
}

double Cell::numeric(const std::string& var) const {
  return label_number(label(var));
}

double expectation(const TabularLaw& law,
                   const std::function<double(const Cell&)>& f) {
  double total = 0.0;
  for (std::size_t cell = 0; cell < law.n_cells(); ++cell) {
    auto idx = law.indices_of(cell);
    total += law.prob_cell(cell) * f(Cell(law, idx));
  }
  return total;
}

TabularLaw mix(const TabularLaw& p, const TabularLaw& q, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    fail(Errc::EpsilonOutOfRange, "mixing weight must lie in [0,1]");
  if (p.n_variables() != q.n_variables())
    fail(Errc::SupportMismatch, "laws have different variable counts");
  for (std::size_t i = 0; i < p.n_variables(); ++i) {
    const auto& a = p.variables()[i];
    const auto& b = q.variables()[i];
    if (a.name != b.name || a.support != b.support)
      fail(Errc::SupportMismatch, "laws disagree at variable " + a.name);
  }
  std::vector<double> out(p.n_cells());
  for (std::size_t cell = 0; cell < p.n_cells(); ++cell)
    out[cell] = (1.0 - eps) * p.prob_cell(cell) + eps * q.prob_cell(cell);
  return TabularLaw(p.variables(), std::move(out));
}

bool check_independence(const TabularLaw& law,
                        const std::vector<std::string>& a,
                        const std::vector<std::string>& b,
                        const std::vector<std::string>& z,
                        double tol) {
  check_disjoint(a, b);
  check_disjoint(a, z);
  check_disjoint(b, z);
  for (const auto& name : a) law.var_index(name);
  for (const auto& name : b) law.var_index(name);
  for (const auto& name : z) law.var_index(name);

  std::vector<std::string> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());

  // Enumerate z-assignments via a marginal over z.
  if (z.empty()) {
    TabularLaw joint = marginal(law, ab);
    TabularLaw ma = marginal(law, a);
    TabularLaw mb = marginal(law, b);
    for (std::size_t cell = 0; cell < joint.n_cells(); ++cell) {
      auto idx = joint.indices_of(cell);
      std::size_t ca = 0, cb = 0;
      for (const auto& name : a) {
        std::size_t ji = joint.var_index(name);
        ca = ca * joint.variables()[ji].support.size() + idx[ji];
      }
      for (const auto& name : b) {
        std::size_t ji = joint.var_index(name);
        cb = cb * joint.variables()[ji].support.size() + idx[ji];
      }
      // Marginals keep the law's variable order; rebuild their cell ids in
      // that order rather than the caller's.
      std::vector<std::size_t> ia(ma.n_variables()), ib(mb.n_variables());
      for (std::size_t i = 0; i < ma.n_variables(); ++i)
        ia[i] = idx[joint.var_index(ma.variables()[i].name)];
      for (std::size_t i = 0; i < mb.n_variables(); ++i)
        ib[i] = idx[joint.var_index(mb.variables()[i].name)];
      double diff = joint.prob_cell(cell) - ma.prob(ia) * mb.prob(ib);
      if (std::abs(diff) > tol) return false;
    }
    return true;
  }

  TabularLaw mz = marginal(law, z);
  for (std::size_t zc = 0; zc < mz.n_cells(); ++zc) {
    if (mz.prob_cell(zc) <= 0.0) continue;
    auto zidx = mz.indices_of(zc);
    Event ev;
    for (std::size_t i = 0; i < mz.n_variables(); ++i) {
      const auto& v = mz.variables()[i];
      ev[v.name] = v.support[zidx[i]];
    }
    TabularLaw slice = condition(law, ev);
    if (!check_independence(slice, a, b, {}, tol)) return false;
  }
  return true;
}

double label_number(const std::string& label) {
  if (label == missing_token())
    fail(Errc::NonNumericLabel, "missing token has no numeric value");
  const char* begin = label.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail(Errc::NonNumericLabel, "label is not numeric: " + label);
  return value;
}

std::string law_to_json(const TabularLaw& law) {
  nlohmann::json j;
  j["variables"] = nlohmann::json::array();
  for (const auto& v : law.variables())
    j["variables"].push_back({{"name", v.name}, {"support", v.support}});
  j["probabilities"] = law.probabilities();
  return j.dump(2);
}

TabularLaw law_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("law JSON: ") + e.what());
  }
  try {
    std::vector<Variable> vars;
    for (const auto& v : j.at("variables"))
      vars.push_back({v.at("name").get<std::string>(),
                      v.at("support").get<std::vector<std::string>>()});
    auto probs = j.at("probabilities").get<std::vector<double>>();
    return TabularLaw(std::move(vars), std::move(probs));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("law JSON: ") + e.what());
  }
}

}  // namespace mnar
