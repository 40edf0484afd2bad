#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "zeno/outcome.hpp"
#include "zeno/trajectory.hpp"

namespace zeno {

struct P01Estimate {
  double value = 0.0;
  double std_error = 0.0;     // binomial, sqrt(p (1 - p) / on_events)
  std::size_t transitions = 0;  // adjacent (On, Off) pairs
  std::size_t on_events = 0;    // On results among positions 0..N-2
};

// Fraction of On results followed by an Off result. Throws NoOnEvents if no
// On result has a successor.
P01Estimate estimate_p01(std::span<const Outcome> outcomes);
inline P01Estimate estimate_p01(const Trajectory& t) { return estimate_p01(t.outcomes); }

// Counts of maximal runs by exact length. Runs touching either end of the
// record are counted like interior runs.
struct RunLengthHistogram {
  std::size_t n_measurements = 0;
  std::map<std::size_t, std::size_t> counts_on;
  std::map<std::size_t, std::size_t> counts_off;

  const std::map<std::size_t, std::size_t>& counts(Outcome o) const noexcept {
    return o == Outcome::On ? counts_on : counts_off;
  }
  std::size_t count(Outcome o, std::size_t q) const noexcept;
  std::size_t runs(Outcome o) const noexcept;
  std::size_t max_run(Outcome o) const noexcept;
  std::size_t max_run() const noexcept;
  // Sum of q * count over both outcome types; equals n_measurements.
  std::size_t covered() const noexcept;

  // Accumulates another batch; associative and commutative.
  RunLengthHistogram& merge(const RunLengthHistogram& other);

  bool operator==(const RunLengthHistogram&) const = default;
};

RunLengthHistogram run_length_histogram(std::span<const Outcome> outcomes);
inline RunLengthHistogram run_length_histogram(const Trajectory& t) { return run_length_histogram(t.outcomes); }

// counts[q] / counts[1] for every observed q. Throws NoUnitRuns if counts[1] == 0.
std::map<std::size_t, double> normalized_ratios(const RunLengthHistogram& hist, Outcome outcome);

// Predicted U(q)/U(1) = weight(q) * (N - q + 1) / N for q = 1..q_max.
// n_measurements == 0 drops the finite-record factor.
struct ModelCurve {
  Model model = Model::Zeno;
  double parameter = 0.0;  // p for Zeno, Omega tau for Coherent
  std::size_t n_measurements = 0;
  std::vector<double> values;  // values[q - 1]

  std::size_t q_max() const noexcept { return values.size(); }
  double at(std::size_t q) const;
};

ModelCurve model_curve(Model model, double p_or_omega_tau, std::size_t n_measurements, std::size_t q_max);

enum class RunSelection { On, Off, Both };

enum class Verdict { Zeno, Coherent, Undecided };
std::string_view to_token(Verdict v) noexcept;

struct Discrimination {
  double log_likelihood_zeno = 0.0;
  double log_likelihood_coherent = 0.0;
  std::size_t runs = 0;

  // Positive: state reduction preferred. May be +-infinity when some observed
  // run is impossible under one of the models.
  double log_likelihood_ratio() const noexcept;
  Verdict verdict() const noexcept;

  Discrimination& operator+=(const Discrimination& other) noexcept;
};

// Per-run log-likelihood of the observed run lengths, with each curve
// normalized into a run-length distribution over q = 1..q_max.
// Errors: InvalidArgument if a curve does not reach the longest observed run,
// DegenerateModels if the normalized curves coincide, ZeroLikelihoodBothModels
// if the data are impossible under both.
Discrimination discriminate(const RunLengthHistogram& hist, const ModelCurve& zeno, const ModelCurve& coherent,
                            RunSelection selection = RunSelection::Both);

// Both outcome types of a record: On runs against the Zeno curve with p0, Off
// runs against p1, both against the coherent law for omega_tau. Curves span
// q = 1..N. An outcome type whose two curves coincide contributes nothing;
// DegenerateModels is raised only when both do.
Discrimination discriminate_record(const RunLengthHistogram& hist, const ChainProbabilities& chain,
                                   double omega_tau);

}  // namespace zeno
