#include "observed_view.hpp"

#include <cmath>

namespace mnar::detail {

ObservedView::ObservedView(const TabularLaw& law) {
  for (const char* name : {"R1", "R2", "Y", "X"})
    if (!law.has_variable(name))
      fail(Errc::UnknownVariable,
           std::string("observed law needs variable ") + name);

  const std::size_t r1v = law.var_index("R1"), r2v = law.var_index("R2");
  const std::size_t yv = law.var_index("Y"), xv = law.var_index("X");

  for (std::size_t v : {r1v, r2v}) {
    const auto& support = law.variables()[v].support;
    if (support != std::vector<std::string>{"0", "1"})
      fail(Errc::SupportMismatch,
           law.variables()[v].name + " must have support {0,1}");
  }

  std::size_t y_missing = law.n_cells(), x_missing = law.n_cells();
  const auto& y_support = law.variables()[yv].support;
  const auto& x_support = law.variables()[xv].support;
  for (std::size_t i = 0; i < y_support.size(); ++i) {
    if (y_support[i] == missing_token()) {
      y_missing = i;
    } else {
      y_labels_.push_back(y_support[i]);
      y_values_.push_back(label_number(y_support[i]));
    }
  }
  for (std::size_t i = 0; i < x_support.size(); ++i) {
    if (x_support[i] == missing_token())
      x_missing = i;
    else
      x_labels_.push_back(x_support[i]);
  }

  if (y_labels_.empty())
    fail(Errc::SupportMismatch, "Y support has no non-missing labels");
  if (x_labels_.empty())
    fail(Errc::SupportMismatch, "X support has no non-missing labels");

  // Map support positions to compact indices with the missing slot last.
  auto compact = [](std::size_t pos, std::size_t missing_pos, std::size_t n) {
    if (pos == missing_pos) return n;
    return pos - (missing_pos < pos ? 1 : 0);
  };

  table_.assign(4 * (ny() + 1) * (nx() + 1), 0.0);
  for (std::size_t cell = 0; cell < law.n_cells(); ++cell) {
    double mass = law.prob_cell(cell);
    auto idx = law.indices_of(cell);
    int r1 = static_cast<int>(idx[r1v]), r2 = static_cast<int>(idx[r2v]);
    std::size_t yi = compact(idx[yv], y_missing, ny());
    std::size_t xi = compact(idx[xv], x_missing, nx());
    bool consistent = (yi == ny()) == (r1 == 0) && (xi == nx()) == (r2 == 0);
    if (!consistent) {
      if (mass > 0.0)
        fail(Errc::SupportMismatch,
             "positive mass on a cell inconsistent with the coarsening "
             "pattern (missing value does not match its indicator)");
      continue;
    }
    table_[((static_cast<std::size_t>(r1) * 2 + r2) * (ny() + 1) + yi) *
               (nx() + 1) +
           xi] += mass;
  }
}

bool ObservedView::y_binary() const {
  if (y_values_.size() != 2) return false;
  for (double v : y_values_)
    if (v != 0.0 && v != 1.0) return false;
  return y_values_[0] != y_values_[1];
}

double ObservedView::stratum(int r1, int r2) const {
  double total = 0.0;
  for (std::size_t yi = 0; yi <= ny(); ++yi)
    for (std::size_t xi = 0; xi <= nx(); ++xi) total += p(r1, r2, yi, xi);
  return total;
}

double ObservedView::p_r1(int r1) const { return stratum(r1, 0) + stratum(r1, 1); }

double ObservedView::p_y_r1(std::size_t yi) const {
  double total = 0.0;
  for (std::size_t xi = 0; xi <= nx(); ++xi)
    total += p(1, 0, yi, xi) + p(1, 1, yi, xi);
  return total;
}

double ObservedView::p_11_y(std::size_t yi) const {
  double total = 0.0;
  for (std::size_t xi = 0; xi <= nx(); ++xi) total += p(1, 1, yi, xi);
  return total;
}

double ObservedView::p_11_x(std::size_t xi) const {
  double total = 0.0;
  for (std::size_t yi = 0; yi <= ny(); ++yi) total += p(1, 1, yi, xi);
  return total;
}

double ObservedView::p_01_x(std::size_t xi) const { return p(0, 1, ny(), xi); }

double ObservedView::p_r2_x(std::size_t xi) const {
  return p_11_x(xi) + p_01_x(xi);
}

double ObservedView::zeta(std::size_t yi) const {
  double with_x = p_11_y(yi);
  double total = with_x + p(1, 0, yi, nx());
  if (total <= 0.0)
    fail(Errc::PositivityViolation,
         "P(R1=1, Y=" + y_label(yi) + ") is zero");
  double z = with_x / total;
  if (z <= 0.0)
    fail(Errc::PositivityViolation,
         "P(R2=1 | R1=1, Y=" + y_label(yi) + ") is zero");
  return z;
}

}  // namespace mnar::detail
