#ifndef MNAR_TESTS_FIXTURES_HPP
#define MNAR_TESTS_FIXTURES_HPP

#include <string>

#include "mnar/graph.hpp"
#include "mnar/perm_model.hpp"

namespace fixtures {

// Reference two-stage law used across the suites. Hand arithmetic:
//   P(X1=1) = 0.5*0.8 + 0.5*0.2 = 0.5
//   P(R1=1 | Y1=1) = 0.6*0.8 + 0.4*0.2 = 0.56
//   P(R1=1 | Y1=0) = 0.6*0.2 + 0.4*0.8 = 0.44
//   P(R1=1) = 0.5*0.56 + 0.5*0.44 = 0.5
//   theta = P(Y1=1 | R1=0) = 0.5*0.44 / 0.5 = 0.44
//   psi = E(Y1) = 0.5
//   rho = zeta(1)/zeta(0) = 0.5/0.8 = 0.625
//       (equivalently (0.28/0.352) / (0.56/0.44): the 1,1-stratum odds
//        0.5*0.56*0.5 : 0.5*0.44*0.8 over the R1=1 odds 0.56 : 0.44)
inline mnar::PermutationLaw w1() {
  mnar::PermutationLaw m;
  m.y_support = {"0", "1"};
  m.x_support = {"0", "1"};
  m.p_y1 = {0.5, 0.5};
  m.p_x1_given_y1 = {{0.8, 0.2}, {0.2, 0.8}};
  m.p_r1_given_x1 = {0.4, 0.6};
  m.zeta = {0.8, 0.5};
  m.q0 = 0.7;
  return m;
}

// Nothing is ever missing: R1 = R2 = 1 almost surely.
inline mnar::PermutationLaw no_missingness() {
  mnar::PermutationLaw m = w1();
  m.p_r1_given_x1 = {1.0, 1.0};
  m.zeta = {1.0, 1.0};
  return m;
}

// zeta constant and X1 independent of everything: the MCAR collapse.
inline mnar::PermutationLaw mcar_like() {
  mnar::PermutationLaw m;
  m.y_support = {"0", "1"};
  m.x_support = {"0", "1"};
  m.p_y1 = {0.4, 0.6};
  m.p_x1_given_y1 = {{0.5, 0.5}, {0.5, 0.5}};
  m.p_r1_given_x1 = {0.7, 0.7};
  m.zeta = {0.6, 0.6};
  m.q0 = 0.5;
  return m;
}

// Point-exposure graph with a partially missing exposure: X confounds,
// the indicator depends on (X, Y), proxies are deterministic.
inline const char* exposure_graph_text() {
  return R"(# point exposure with a missing exposure indicator
node X kind=context;
node A^(1) kind=counterfactual;
node Y kind=context;
node R kind=missind;
node A kind=proxy;
edge X -> A^(1);
edge A^(1) -> Y;
edge X -> Y;
edge X -> R;
edge Y -> R;
edge R -> A [det];
edge A^(1) -> A [det];
)";
}

inline mnar::Dag exposure_mdag() {
  return mnar::parse_graph_spec(exposure_graph_text());
}

}  // namespace fixtures

#endif  // MNAR_TESTS_FIXTURES_HPP
