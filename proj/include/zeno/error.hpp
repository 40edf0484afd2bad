#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zeno {

enum class ErrorKind {
  InvalidArgument,
  OverdampedRegime,
  NonResonant,
  InvalidProbability,
  IntegrationFailure,
  NegativeVariance,
  CoherentModeRequiresNoRelaxation,
  NoOnEvents,
  NoUnitRuns,
  DegenerateModels,
  ZeroLikelihoodBothModels,
  NoPositiveCandidate,
  InfeasibleContrast,
  NonConvergence,
  DataTooSparse,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Input errors are caller mistakes (bad arguments, malformed data); everything
// else is a physics-domain failure. The CLI maps the two onto exit codes 2 and 3.
bool is_input_error(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace zeno
