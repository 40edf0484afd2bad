#include "zeno/error.hpp"

namespace zeno {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OverdampedRegime: return "OverdampedRegime";
    case ErrorKind::NonResonant: return "NonResonant";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::IntegrationFailure: return "IntegrationFailure";
    case ErrorKind::NegativeVariance: return "NegativeVariance";
    case ErrorKind::CoherentModeRequiresNoRelaxation: return "CoherentModeRequiresNoRelaxation";
    case ErrorKind::NoOnEvents: return "NoOnEvents";
    case ErrorKind::NoUnitRuns: return "NoUnitRuns";
    case ErrorKind::DegenerateModels: return "DegenerateModels";
    case ErrorKind::ZeroLikelihoodBothModels: return "ZeroLikelihoodBothModels";
    case ErrorKind::NoPositiveCandidate: return "NoPositiveCandidate";
    case ErrorKind::InfeasibleContrast: return "InfeasibleContrast";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::DataTooSparse: return "DataTooSparse";
  }
  return "Unknown";
}

bool is_input_error(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::NoOnEvents:
    case ErrorKind::NoUnitRuns:
    case ErrorKind::DataTooSparse:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace zeno
