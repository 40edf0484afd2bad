#pragma once

// Run-length laws of the two competing pictures. A run is a maximal block of
// identical probe results; weight(q) is proportional to the probability that a
// run has length exactly q, normalized so weight(1) = 1.

#include <cstddef>
#include <optional>
#include <vector>

namespace zeno {

// State reduction after every probe: weight(q) = p^(q-1).
double zeno_run_weight(double p, std::size_t q);

// Uninterrupted coherent nutation: weight(q) = V(q-1) with V(k) = cos^2(k Omega tau / 2).
//
// V is periodic and cannot be normalized over all q, so the law ends at the
// first node or first minimum of V: runs are at most max_run() long, where
// max_run() is the first k >= 1 with V(k) ~ 0 or V(k) > V(k-1). When
// Omega tau is a multiple of 2 pi, V = 1 everywhere and runs never end.
class CoherentRunLaw {
 public:
  explicit CoherentRunLaw(double omega_tau);

  double omega_tau() const noexcept { return omega_tau_; }
  // V(k), evaluated from the reduced phase so large k stays accurate.
  double v(std::size_t k) const noexcept;
  // V(q-1) for q <= max_run(), 0 beyond.
  double weight(std::size_t q) const noexcept;
  std::optional<std::size_t> max_run() const noexcept { return max_run_; }

  // Probability that a run of current length q continues to q + 1, for
  // q = 1..horizon. Index 0 of the result holds q = 1.
  std::vector<double> continue_probabilities(std::size_t horizon) const;

 private:
  double omega_tau_;
  double reduced_;  // |Omega tau| folded into [0, pi]
  std::optional<std::size_t> max_run_;
};

}  // namespace zeno
