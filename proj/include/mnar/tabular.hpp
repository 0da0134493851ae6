#ifndef MNAR_TABULAR_HPP
#define MNAR_TABULAR_HPP

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mnar/errors.hpp"

namespace mnar {

// Token used for a coarsened value that was not observed. It is a label
// like any other in a support, never a number.
inline const std::string& missing_token() {
  static const std::string token = "?";
  return token;
}

struct Variable {
  std::string name;
  std::vector<std::string> support;
};

// An assignment of labels to a subset of variables.
using Event = std::map<std::string, std::string>;

// Exact joint probability table over finitely supported variables.
//
// Cells are stored densely in lexicographic order of the index tuple with
// the *last* variable varying fastest. All reductions run in that fixed
// order so that repeated evaluations are bit-identical. Immutable after
// construction; operations return new laws.
class TabularLaw {
 public:
  static constexpr double kNormTol = 1e-12;
  static constexpr std::size_t kMaxCells = 1000000;

  TabularLaw(std::vector<Variable> variables, std::vector<double> probabilities);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  std::size_t n_variables() const { return variables_.size(); }
  std::size_t n_cells() const { return probabilities_.size(); }

  std::size_t var_index(const std::string& name) const;  // UnknownVariable
  bool has_variable(const std::string& name) const;
  // Index of `label` in the support of variable `var`; UnknownLabel if absent.
  std::size_t label_index(std::size_t var, const std::string& label) const;

  // Linear cell id from per-variable label indices and back.
  std::size_t cell_of(const std::vector<std::size_t>& indices) const;
  std::vector<std::size_t> indices_of(std::size_t cell) const;

  double prob_cell(std::size_t cell) const { return probabilities_[cell]; }
  // Probability of a full assignment given as label indices.
  double prob(const std::vector<std::size_t>& indices) const {
    return probabilities_[cell_of(indices)];
  }

 private:
  std::vector<Variable> variables_;
  std::vector<double> probabilities_;
  std::vector<std::size_t> strides_;
};

// One conditional table P(var | given...) for building a joint law.
// `probs` is laid out lexicographically over (given..., var) with `var`
// fastest, matching TabularLaw's cell order.
struct ConditionalFactor {
  std::string var;
  std::vector<std::string> support;
  std::vector<std::string> given;
  std::vector<double> probs;
};

// Joint law as the ordered product of conditional factors. Each factor may
// condition only on variables that appear earlier in the list.
TabularLaw law_from_factors(const std::vector<ConditionalFactor>& factors);

// Sum out everything except `vars` (kept in the law's original order).
TabularLaw marginal(const TabularLaw& law, const std::vector<std::string>& vars);

// Law over the remaining variables given `event`; the event must have
// strictly positive probability.
TabularLaw condition(const TabularLaw& law, const Event& event);

double event_prob(const TabularLaw& law, const Event& event);

// View of one joint cell handed to expectation integrands.
class Cell {
 public:
  Cell(const TabularLaw& law, const std::vector<std::size_t>& indices)
      : law_(&law), indices_(&indices) {}

  const std::string& label(const std::string& var) const;
  std::size_t index(const std::string& var) const;
  double numeric(const std::string& var) const;  // NonNumericLabel on failure

 private:
  const TabularLaw* law_;
  const std::vector<std::size_t>* indices_;
};

// Sum of f(cell) * P(cell) over all cells, in storage order.
double expectation(const TabularLaw& law,
                   const std::function<double(const Cell&)>& f);

// Cellwise (1-eps)*p + eps*q over identical variables and supports.
TabularLaw mix(const TabularLaw& p, const TabularLaw& q, double eps);

// True iff A and B factorize given every positive-mass assignment of Z,
// within `tol` in max norm on the conditional joint.
bool check_independence(const TabularLaw& law,
                        const std::vector<std::string>& a,
                        const std::vector<std::string>& b,
                        const std::vector<std::string>& z,
                        double tol);

// Parse a label as a number; throws NonNumericLabel (the missing token is
// never numeric).
double label_number(const std::string& label);

// JSON schema: {"variables":[{"name":..,"support":[..]},..],
//               "probabilities":[..]} with cells in storage order.
std::string law_to_json(const TabularLaw& law);
TabularLaw law_from_json(const std::string& text);

}  // namespace mnar

#endif  // MNAR_TABULAR_HPP
