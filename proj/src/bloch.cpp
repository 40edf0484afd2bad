#include "zeno/bloch.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "zeno/error.hpp"

namespace zeno {

namespace {

constexpr double kProbabilitySlack = 1e-12;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

bool finite_non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void validate(const DriveParams& drive) {
  if (!finite_non_negative(drive.omega)) invalid("Rabi frequency must be finite and >= 0");
  if (!std::isfinite(drive.delta)) invalid("detuning must be finite");
  if (!(std::isfinite(drive.tau) && drive.tau > 0.0)) invalid("pulse length must be > 0");
}

void validate(const RelaxationParams& relax) {
  if (!finite_non_negative(relax.big_gamma)) invalid("inversion relaxation rate must be >= 0");
  if (!finite_non_negative(relax.gamma_ph)) invalid("phase diffusion rate must be >= 0");
}

void validate(const DegeneracyFactors& f) {
  if (!(f.f0 > 0.0 && f.f0 <= 1.0)) invalid("f0 must lie in (0, 1]");
  if (!(f.f1 > 0.0 && f.f1 <= 1.0)) invalid("f1 must lie in (0, 1]");
}

DerivedBlochParams derive_bloch_params(double omega_tau, double a, double b) {
  if (!finite_non_negative(omega_tau)) invalid("Omega tau must be finite and >= 0");
  if (!finite_non_negative(a) || !finite_non_negative(b)) invalid("relaxation parameters a, b must be >= 0");

  const double x = omega_tau * omega_tau;
  const double split = a - b;
  if (x <= split * split) {
    std::ostringstream msg;
    msg << "(Omega tau)^2 = " << x << " does not exceed (a - b)^2 = " << split * split;
    throw Error(ErrorKind::OverdampedRegime, msg.str());
  }

  DerivedBlochParams p;
  p.a = a;
  p.b = b;
  p.theta = std::sqrt((omega_tau - split) * (omega_tau + split));
  p.eps0 = std::atan((a + b) / p.theta);
  p.eps1 = std::atan((split - 2.0 * b * x / (x + 8.0 * a * b)) / p.theta);
  p.b0 = 0.5 * x / (x + 4.0 * a * b);
  p.b1 = 1.0 - p.b0;
  return p;
}

DerivedBlochParams derive_bloch_params(const DriveParams& drive, const RelaxationParams& relax) {
  validate(drive);
  validate(relax);
  if (drive.delta != 0.0) {
    throw Error(ErrorKind::NonResonant, "damped nutation formula holds on resonance only");
  }
  const double a = 0.5 * relax.gamma() * drive.tau;
  const double b = 0.5 * relax.big_gamma * drive.tau;
  return derive_bloch_params(drive.omega_tau(), a, b);
}

DerivedBlochParams bloch_params_from_phase(double theta, double a_plus_b, double a_minus_b) {
  if (!(std::isfinite(theta) && theta > 0.0)) invalid("theta must be > 0");
  if (!finite_non_negative(a_plus_b) || std::abs(a_minus_b) > a_plus_b) {
    invalid("need a + b >= |a - b|");
  }
  const double a = 0.5 * (a_plus_b + a_minus_b);
  const double b = 0.5 * (a_plus_b - a_minus_b);
  return derive_bloch_params(std::hypot(theta, a_minus_b), a, b);
}

DerivedBlochParams with_contrast(DerivedBlochParams params, double b0) {
  if (!(b0 > 0.0 && b0 <= 0.5)) invalid("B0 must lie in (0, 1/2]");
  params.b0 = b0;
  params.b1 = 1.0 - b0;
  return params;
}

double excitation_probability_coherent(const DriveParams& drive) {
  validate(drive);
  const double generalized = std::hypot(drive.omega, drive.delta);
  if (generalized == 0.0) return 0.0;
  const double cos2chi = (drive.omega / generalized) * (drive.omega / generalized);
  const double half = std::sin(0.5 * generalized * drive.tau);
  return cos2chi * half * half;
}

double survival_formula(Outcome start, const DerivedBlochParams& p, const DegeneracyFactors& f) noexcept {
  const bool ground = start == Outcome::On;
  const double eps = ground ? p.eps0 : p.eps1;
  const double weight = ground ? f.f0 * p.b0 : f.f1 * p.b1;
  // sqrt(1 + tan^2 eps) = 1 / cos eps for |eps| < pi/2.
  const double envelope = std::exp(-(p.a + p.b)) * std::cos(p.theta - eps) / std::cos(eps);
  return 1.0 - weight * (1.0 - envelope);
}

double survival_probability(Outcome start, const DerivedBlochParams& params, const DegeneracyFactors& f) {
  validate(f);
  const double p = survival_formula(start, params, f);
  if (!(p >= -kProbabilitySlack && p <= 1.0 + kProbabilitySlack)) {
    std::ostringstream msg;
    msg << "survival probability " << p << " for start '" << to_token(start) << "' is outside [0, 1]";
    throw Error(ErrorKind::InvalidProbability, msg.str());
  }
  return p;
}

double survival_probability(Outcome start, const DriveParams& drive, const RelaxationParams& relax,
                            const DegeneracyFactors& f) {
  return survival_probability(start, derive_bloch_params(drive, relax), f);
}

double phase_std(double a, double b) {
  const double variance_arg = 2.0 * a - b;
  if (!(variance_arg >= 0.0)) {
    throw Error(ErrorKind::NegativeVariance, "2a - b must be >= 0");
  }
  return std::sqrt(2.0) * std::sqrt(variance_arg);
}

Bandwidth bandwidth_from_phase(double delta_phi, double tau, double limit_hz) {
  if (!(tau > 0.0)) invalid("tau must be > 0");
  if (!(delta_phi >= 0.0)) invalid("phase deviation must be >= 0");
  Bandwidth bw;
  bw.hz = delta_phi / tau;
  bw.angular_hz = bw.hz / (2.0 * std::numbers::pi);
  bw.compatible = bw.hz <= limit_hz * (1.0 + kBandwidthSlack);
  return bw;
}

}  // namespace zeno
