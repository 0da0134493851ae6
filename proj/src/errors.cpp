#include "mnar/errors.hpp"

namespace mnar {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::CounterfactualDownstreamOfMissingness:
      return "CounterfactualDownstreamOfMissingness";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::BadProxyParents: return "BadProxyParents";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::OverlappingSets: return "OverlappingSets";
    case Errc::FixedInterventionMisuse: return "FixedInterventionMisuse";
    case Errc::SplitOnProxy: return "SplitOnProxy";
    case Errc::BadTopologicalOrder: return "BadTopologicalOrder";
    case Errc::UnnormalizedFactor: return "UnnormalizedFactor";
    case Errc::UnnormalizedLaw: return "UnnormalizedLaw";
    case Errc::ZeroProbabilityEvent: return "ZeroProbabilityEvent";
    case Errc::UnknownVariable: return "UnknownVariable";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::NonNumericLabel: return "NonNumericLabel";
    case Errc::SupportMismatch: return "SupportMismatch";
    case Errc::SupportTooLarge: return "SupportTooLarge";
    case Errc::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case Errc::PositivityViolation: return "PositivityViolation";
    case Errc::NotBinaryOutcome: return "NotBinaryOutcome";
    case Errc::DegenerateOdds: return "DegenerateOdds";
    case Errc::ZeroDensity: return "ZeroDensity";
    case Errc::EmptyStratum: return "EmptyStratum";
    case Errc::RangeViolation: return "RangeViolation";
    case Errc::FoldTooSmall: return "FoldTooSmall";
    case Errc::ParseError: return "ParseError";
  }
  return "UnknownError";
}

}  // namespace mnar
