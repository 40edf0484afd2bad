#include "zeno/run_law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zeno/error.hpp"

namespace zeno {

namespace {

constexpr double kNodeTolerance = 1e-12;
constexpr double kRiseTolerance = 1e-14;
// Below this folded phase the nutation is treated as a whole number of cycles.
constexpr double kFlatPhase = 1e-12;
constexpr std::size_t kDirectSumLimit = 10'000'000;

// Sum_{j=m}^{M} cos(j r), r > 0.
double cosine_sum(double r, double m, double big_m) {
  return (std::sin((big_m + 0.5) * r) - std::sin((m - 0.5) * r)) / (2.0 * std::sin(0.5 * r));
}

}  // namespace

double zeno_run_weight(double p, std::size_t q) {
  if (q == 0) throw Error(ErrorKind::InvalidArgument, "run length must be >= 1");
  return std::pow(p, static_cast<double>(q - 1));
}

CoherentRunLaw::CoherentRunLaw(double omega_tau) : omega_tau_(omega_tau) {
  if (!std::isfinite(omega_tau)) throw Error(ErrorKind::InvalidArgument, "Omega tau must be finite");
  reduced_ = std::abs(std::remainder(omega_tau, 2.0 * std::numbers::pi));
  if (reduced_ < kFlatPhase) {
    reduced_ = 0.0;
    return;
  }
  // V decreases until k r reaches pi; the node or the first rise sits within a
  // couple of steps of k = pi / r.
  const double pivot = std::numbers::pi / reduced_;
  std::size_t k = pivot > 3.0 ? static_cast<std::size_t>(pivot) - 2 : 1;
  for (;; ++k) {
    const double vk = v(k);
    if (vk <= kNodeTolerance || vk > v(k - 1) + kRiseTolerance) {
      max_run_ = k;
      return;
    }
  }
}

double CoherentRunLaw::v(std::size_t k) const noexcept {
  return 0.5 * (1.0 + std::cos(static_cast<double>(k) * reduced_));
}

double CoherentRunLaw::weight(std::size_t q) const noexcept {
  if (q == 0) return 0.0;
  if (max_run_ && q > *max_run_) return 0.0;
  return v(q - 1);
}

std::vector<double> CoherentRunLaw::continue_probabilities(std::size_t horizon) const {
  std::vector<double> out(horizon, 1.0);
  if (!max_run_) return out;
  const std::size_t qmax = *max_run_;
  const std::size_t m = std::min(qmax, horizon + 1);

  // tail = Sum_{k=m+1}^{qmax} weight(k)
  double tail = 0.0;
  if (qmax > m) {
    if (qmax - m <= kDirectSumLimit) {
      for (std::size_t k = qmax; k > m; --k) tail += v(k - 1);
    } else {
      const double count = static_cast<double>(qmax - m);
      tail = 0.5 * count + 0.5 * cosine_sum(reduced_, static_cast<double>(m), static_cast<double>(qmax - 1));
    }
  }

  // survival[q] = Sum_{k=q}^{qmax} weight(k) for q = 1..m+1
  std::vector<double> survival(m + 2, 0.0);
  survival[m + 1] = tail;
  for (std::size_t q = m; q >= 1; --q) survival[q] = survival[q + 1] + v(q - 1);

  for (std::size_t q = 1; q <= horizon; ++q) {
    if (q >= qmax) {
      out[q - 1] = 0.0;
    } else {
      out[q - 1] = survival[q] > 0.0 ? survival[q + 1] / survival[q] : 0.0;
    }
  }
  return out;
}

}  // namespace zeno
