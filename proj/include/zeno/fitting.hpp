#pragma once

// Parameter recovery from measured statistics: steady-state excitation and
// total damping from the resonance contrast, and the fractional nutation phase
// and upper-level degeneracy factor from run-length distributions.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "zeno/run_stats.hpp"
#include "zeno/trajectory.hpp"

namespace zeno {

struct ContrastFit {
  double b0 = 0.0;
  double a_plus_b = 0.0;
};

// Extremes of the excitation probability 1 - p0 over theta in the large-theta
// limit (eps0 -> 0): f0 B0 (1 +- exp(-(a+b))). The dropped terms are of order
// (a+b)/theta, about 1e-4 at theta ~ 640 * 2 pi.
struct ContrastExtremes {
  double p_max = 0.0;
  double p_min = 0.0;
};
ContrastExtremes contrast_extremes(double b0, double a_plus_b, double f0);

// Inverse of contrast_extremes. Throws InfeasibleContrast for zero total,
// zero contrast, or a contrast ratio outside (0, 1].
ContrastFit fit_contrast(double p_max, double p_min, double f0);

// Observed U(q)/U(1) for one outcome type, with per-q weights.
struct RunSeries {
  std::map<std::size_t, double> ratios;
  std::map<std::size_t, double> weights;  // missing entries weigh 1
};

enum class RunWeighting {
  // 1 / Var(U(q)/U(1)) by the delta method, U(1)^3 / (U(q) (U(1) + U(q))).
  InverseVariance,
  // Number of runs of length q.
  RunCount,
};

// Ratios from a histogram with per-q weights. Both schemes scale linearly with
// the counts, so multiplying every count by a constant leaves a fit unchanged.
RunSeries run_series(const RunLengthHistogram& hist, Outcome outcome,
                     RunWeighting weighting = RunWeighting::InverseVariance);
// Ratios with unit weights.
RunSeries run_series(const std::map<std::size_t, double>& ratios);

// Quantities held fixed while fitting run lengths. The nutation angle is
// theta = 2 pi n_cycles + theta_prime.
struct RunFitFixed {
  double a_plus_b = 0.395;
  double b0 = 0.49;
  double f0 = 0.5;
  long long n_cycles = 640;
  double a_minus_b = 0.0;  // not observable; enters only through eps1
};

ChainProbabilities run_fit_chain(double theta_prime, double f1, const RunFitFixed& fixed);

enum class FitMode {
  Joint,     // theta_prime and f1 together against both outcome types
  TwoStage,  // theta_prime from On runs, then f1 from Off runs at that phase
};

struct RunFitOptions {
  FitMode mode = FitMode::Joint;
  double theta_step = 1e-3 * 3.14159265358979323846;
  double f1_step = 0.01;
  double gradient_tolerance = 1e-10;
  // Also converged once a Newton step would lower the objective by less than
  // this fraction of its value.
  double value_resolution = 1e-14;
  std::size_t max_iterations = 500;
  std::size_t refine_candidates = 6;
};

struct FitResult {
  std::map<std::string, double> parameters;
  double residual = 0.0;  // weighted SSE, weights normalized to unit sum
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> residual_history;  // refinement of the selected start, non-increasing

  double param(std::string_view name) const;
};

// Weighted least squares of U(q)/U(1) against p^(q-1) (N - q + 1) / N with
// p0(theta_prime) and p1(theta_prime, f1) from the damped-nutation formula.
// Coarse grid over theta_prime in [0, 2 pi) and f1 in (0, 1], then bounded
// damped Newton from the best local minima of the grid. Weights come from the
// series (see RunWeighting).
//
// Note theta_prime and 2 pi - theta_prime give the same probabilities up to
// terms of order (a+b)/theta; noisy data cannot tell them apart. The mirror
// value is reported as "theta_prime_mirror".
//
// Errors: DataTooSparse (< 3 distinct q, or an empty series), NonConvergence.
FitResult fit_run_lengths(const RunSeries& on, const RunSeries& off, const RunFitFixed& fixed,
                          std::size_t n_measurements, const RunFitOptions& options = {});

// Objective evaluated directly, for checks.
double run_fit_objective(const RunSeries& on, const RunSeries& off, const RunFitFixed& fixed,
                         std::size_t n_measurements, double theta_prime, double f1);

}  // namespace zeno
