#ifndef MNAR_OBSERVED_VIEW_HPP
#define MNAR_OBSERVED_VIEW_HPP

#include <string>
#include <vector>

#include "mnar/tabular.hpp"

namespace mnar::detail {

// Indexed access to a coarse law over (R1, R2, Y, X) where Y carries the
// missing token exactly when R1=0 and X exactly when R2=0. Cells that
// violate that pattern must have zero mass. Label indices run over the
// non-missing supports; ny()/nx() denote the missing slot.
class ObservedView {
 public:
  explicit ObservedView(const TabularLaw& law);

  std::size_t ny() const { return y_labels_.size(); }
  std::size_t nx() const { return x_labels_.size(); }
  const std::string& y_label(std::size_t i) const { return y_labels_[i]; }
  const std::string& x_label(std::size_t i) const { return x_labels_[i]; }
  double y_value(std::size_t i) const { return y_values_[i]; }
  const std::vector<std::string>& y_labels() const { return y_labels_; }
  const std::vector<std::string>& x_labels() const { return x_labels_; }

  // True when every non-missing y label parses as 0/1 and both occur.
  bool y_binary() const;

  // Joint mass; yi == ny() is the missing slot, xi == nx() likewise.
  double p(int r1, int r2, std::size_t yi, std::size_t xi) const {
    return table_[((static_cast<std::size_t>(r1) * 2 + r2) * (ny() + 1) + yi) *
                      (nx() + 1) +
                  xi];
  }

  double stratum(int r1, int r2) const;   // P(R1=r1, R2=r2)
  double p_r1(int r1) const;              // P(R1=r1)
  double p_y_r1(std::size_t yi) const;    // P(R1=1, Y=y)
  double p_11_y(std::size_t yi) const;    // P(R1=1, R2=1, Y=y)
  double p_11_x(std::size_t xi) const;    // P(R1=1, R2=1, X=x)
  double p_01_x(std::size_t xi) const;    // P(R1=0, R2=1, X=x)
  double p_r2_x(std::size_t xi) const;    // P(R2=1, X=x)

  // P(R2=1 | R1=1, Y=y); PositivityViolation if zero or undefined.
  double zeta(std::size_t yi) const;

 private:
  std::vector<std::string> y_labels_;
  std::vector<std::string> x_labels_;
  std::vector<double> y_values_;
  std::vector<double> table_;
};

}  // namespace mnar::detail

#endif  // MNAR_OBSERVED_VIEW_HPP
