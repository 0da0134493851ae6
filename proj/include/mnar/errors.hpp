#ifndef MNAR_ERRORS_HPP
#define MNAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mnar {

// Machine-readable failure codes. The CLI prints these verbatim, so the
// names are part of the tool's output contract.
enum class Errc {
  // graph layer
  CycleDetected,
  CounterfactualDownstreamOfMissingness,
  DuplicateName,
  BadProxyParents,
  UnknownNode,
  OverlappingSets,
  FixedInterventionMisuse,
  SplitOnProxy,
  // probability tables
  BadTopologicalOrder,
  UnnormalizedFactor,
  UnnormalizedLaw,
  ZeroProbabilityEvent,
  UnknownVariable,
  UnknownLabel,
  NonNumericLabel,
  SupportMismatch,
  SupportTooLarge,
  EpsilonOutOfRange,
  // functionals and estimation
  PositivityViolation,
  NotBinaryOutcome,
  DegenerateOdds,
  ZeroDensity,
  EmptyStratum,
  RangeViolation,
  FoldTooSmall,
  // i/o
  ParseError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, Errc code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace mnar

#endif  // MNAR_ERRORS_HPP
