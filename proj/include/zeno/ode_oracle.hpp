#pragma once

// Direct numerical integration of the optical Bloch equations. Used only as an
// independent check of the closed forms in bloch.hpp.

#include <cstddef>
#include <functional>

#include "zeno/bloch.hpp"

namespace zeno {

struct BlochState {
  double u = 0.0;
  double v = 0.0;
  double w = -1.0;  // -1: ground, +1: metastable

  double excited_population() const noexcept { return 0.5 * (1.0 + w); }
  double radius_squared() const noexcept { return u * u + v * v + w * w; }

  static constexpr BlochState ground() noexcept { return {0.0, 0.0, -1.0}; }
  static constexpr BlochState excited() noexcept { return {0.0, 0.0, 1.0}; }
};

// Rates entering the equations of motion
//   du/dt = -gamma u + delta v
//   dv/dt = -gamma v - delta u + omega w
//   dw/dt = -omega v - big_gamma (w + 1)
// gamma is the coherence decay rate and is not tied to gamma >= big_gamma / 2.
struct BlochRates {
  double omega = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double big_gamma = 0.0;

  static BlochRates from(const DriveParams& drive, const RelaxationParams& relax) noexcept {
    return {drive.omega, drive.delta, relax.gamma(), relax.big_gamma};
  }
};

struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-12;
  std::size_t max_steps = 50'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

using BlochObserver = std::function<void(double t, const BlochState&)>;

// Adaptive Dormand-Prince 5(4) integration from t = 0 to t_end. The observer,
// if set, sees the initial state and every accepted step.
BlochState ode_oracle_evolve(const BlochState& initial, const BlochRates& rates, double t_end,
                             const OdeOptions& options = {}, const BlochObserver& observer = {},
                             OdeStats* stats = nullptr);

BlochState ode_oracle_evolve(const BlochState& initial, const DriveParams& drive, const RelaxationParams& relax,
                             double t_end, const OdeOptions& options = {});

// Probability of leaving the starting level after one pulse of length drive.tau,
// evaluated by integration.
double ode_transition_probability(Outcome start, const BlochRates& rates, double tau, const OdeOptions& options = {});

}  // namespace zeno
