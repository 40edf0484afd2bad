#pragma once

// Stroboscopic excitation spectrum and recovery of the total nutation angle
// from the fringe increment per detuning step. The vibronic sideband is not
// modelled; scans cover the carrier only.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "zeno/bloch.hpp"

namespace zeno {

enum class ScanAxis { Detuning, PulseLength };

struct SpectrumPoint {
  double axis_value = 0.0;  // rad/s for a detuning scan, s for a pulse-length scan
  double p01_model = 0.0;
  std::optional<double> p01_mc;
  std::optional<double> std_error;
};

struct MonteCarloRequest {
  std::size_t n_measurements = 500;
  std::uint64_t seed = 0;
};

// Evaluates the coherent excitation probability at axis = start + k * step,
// k = 0..count-1, where start is the base drive's detuning (or pulse length).
// With a Monte Carlo request, each point also gets a relaxation-free Zeno
// record and its p01 estimate. Points are independent and evaluated on up to
// `threads` threads (0: hardware concurrency).
std::vector<SpectrumPoint> scan_detuning(const DriveParams& base, double step, std::size_t count,
                                         const std::optional<MonteCarloRequest>& mc = std::nullopt,
                                         ScanAxis axis = ScanAxis::Detuning, unsigned threads = 1);

// Increase of the nutation angle when the detuning grows by delta_omega:
// sqrt(theta^2 + (tau delta_omega)^2) - theta.
double delta_theta(double theta, double delta_omega, double tau);

struct ThetaCandidate {
  long branch = 0;            // m in delta_theta = residual + 2 pi m
  double delta_theta = 0.0;
  double theta = 0.0;
  long long n = 0;            // floor(theta / 2 pi)
  double distance = 0.0;      // |theta - theta_app|
};

// Inverts delta_theta for every branch m >= 0 that yields a positive theta,
// sorted by closeness to the approximate angle. Throws NoPositiveCandidate.
std::vector<ThetaCandidate> resolve_theta(double theta_app, double observed_residual, double delta_omega,
                                          double tau);

}  // namespace zeno
