#pragma once

// Closed-form dynamics of the driven two-level transition: coherent excitation
// off resonance, and the damped (Torrey-type) nutation on resonance with
// inversion and phase relaxation.

#include <cmath>

#include "zeno/outcome.hpp"

namespace zeno {

struct DriveParams {
  double omega = 0.0;  // Rabi frequency, rad/s
  double delta = 0.0;  // detuning from the line centre, rad/s
  double tau = 0.0;    // drive-pulse length, s

  double omega_tau() const noexcept { return omega * tau; }
};

struct RelaxationParams {
  double big_gamma = 0.0;  // inversion relaxation rate, 1/s
  double gamma_ph = 0.0;   // laser phase-diffusion rate, 1/s

  // Transverse (coherence) relaxation rate.
  double gamma() const noexcept { return gamma_ph + 0.5 * big_gamma; }
  // Phase diffusion constant, <dphi^2> = D t.
  double diffusion() const noexcept { return 2.0 * gamma_ph; }
  bool is_zero() const noexcept { return big_gamma == 0.0 && gamma_ph == 0.0; }
};

struct DegeneracyFactors {
  double f0 = 1.0;
  double f1 = 1.0;
};

// Dimensionless bundle entering the resonant survival formula.
struct DerivedBlochParams {
  double a = 0.0;      // gamma * tau / 2
  double b = 0.0;      // Gamma * tau / 2
  double theta = 0.0;  // damped nutation angle, theta^2 = (Omega tau)^2 - (a - b)^2
  double eps0 = 0.0;   // phase offset for a pulse starting in the ground state
  double eps1 = 0.0;   // phase offset for a pulse starting in the metastable state
  double b0 = 0.5;     // steady-state excitation
  double b1 = 0.5;     // 1 - b0

  double omega_tau() const noexcept { return std::sqrt(theta * theta + (a - b) * (a - b)); }
};

void validate(const DriveParams& drive);
void validate(const RelaxationParams& relax);
void validate(const DegeneracyFactors& f);

// Throws NonResonant for delta != 0 and OverdampedRegime when (Omega tau)^2 <= (a - b)^2.
DerivedBlochParams derive_bloch_params(const DriveParams& drive, const RelaxationParams& relax);

// Same, from the dimensionless inputs directly. a and b are not tied to a
// non-negative phase-diffusion rate here, so any a, b >= 0 is accepted.
DerivedBlochParams derive_bloch_params(double omega_tau, double a, double b);

// Parameterization used when fitting: nutation angle theta and total damping
// a + b are what the data constrain; a - b is not observable and defaults to 0.
DerivedBlochParams bloch_params_from_phase(double theta, double a_plus_b, double a_minus_b = 0.0);

// Replaces the steady-state excitation by a measured contrast value, keeping
// the transient shape. Used for contrast-calibrated B0 that does not follow
// from the relaxation rates.
DerivedBlochParams with_contrast(DerivedBlochParams params, double b0);

// Probability of excitation after one pulse without relaxation,
// cos^2(chi) sin^2(theta/2) with tan(chi) = delta/omega and theta = sqrt(omega^2 + delta^2) tau.
// Returns 0 when omega = delta = 0.
double excitation_probability_coherent(const DriveParams& drive);

// Probability that a pulse leaves the ion in its starting level:
//   p_i = 1 - f_i B_i (1 - sqrt(1 + tan^2 eps_i) exp(-(a+b)) cos(theta - eps_i)).
// Throws InvalidProbability when the value leaves [0, 1] by more than 1e-12.
double survival_probability(Outcome start, const DerivedBlochParams& params, const DegeneracyFactors& f);
double survival_probability(Outcome start, const DriveParams& drive, const RelaxationParams& relax,
                            const DegeneracyFactors& f);

// The bare formula with no range check.
double survival_formula(Outcome start, const DerivedBlochParams& params, const DegeneracyFactors& f) noexcept;

// Standard deviation of the drive phase over one pulse, sqrt(2) sqrt(2a - b).
double phase_std(double a, double b);

struct Bandwidth {
  double hz = 0.0;          // delta_phi / tau
  double angular_hz = 0.0;  // delta_phi / (2 pi tau)
  bool compatible = false;  // hz "at most about" the limit, see bandwidth_from_phase
};

inline constexpr double kLaserBandwidthLimitHz = 500.0;
inline constexpr double kBandwidthSlack = 0.25;

// delta_nu = delta_phi / tau, without a 2 pi. "Compatible" means
// delta_nu <= limit * (1 + kBandwidthSlack): the comparison is an order-of-
// magnitude one, so 1.2 rad over 2 ms (600 Hz) passes against 500 Hz while
// 2 rad (1000 Hz) does not.
Bandwidth bandwidth_from_phase(double delta_phi, double tau, double limit_hz = kLaserBandwidthLimitHz);

namespace detail {

// Survival probability as a function of the nutation angle theta = whole + phase,
// where whole is a multiple of 2 pi. The trigonometric terms use the phase
// alone, so phase resolution is not lost to a large whole-cycle part. Written
// generically so the fitter can differentiate it with a complex step.
template <typename T>
T survival_at_phase(Outcome start, double whole, T phase, double a_plus_b, double a_minus_b, double b_start,
                    double f_start) {
  using std::cos;
  using std::sin;
  const double a = 0.5 * (a_plus_b + a_minus_b);
  const double b = 0.5 * (a_plus_b - a_minus_b);
  const T theta = whole + phase;
  T tan_eps;
  if (start == Outcome::On) {
    tan_eps = a_plus_b / theta;
  } else {
    const T x = theta * theta + a_minus_b * a_minus_b;
    tan_eps = (a_minus_b - 2.0 * b * x / (x + 8.0 * a * b)) / theta;
  }
  // sqrt(1 + tan^2 eps) cos(theta - eps) = cos(theta) + tan(eps) sin(theta)
  const T envelope = std::exp(-a_plus_b) * (cos(phase) + tan_eps * sin(phase));
  return 1.0 - f_start * b_start * (1.0 - envelope);
}
}  // namespace detail

}  // namespace zeno
