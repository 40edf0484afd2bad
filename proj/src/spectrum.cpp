#include "zeno/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "zeno/error.hpp"
#include "zeno/rng.hpp"
#include "zeno/run_stats.hpp"
#include "zeno/trajectory.hpp"

namespace zeno {

namespace {

SpectrumPoint evaluate_point(const DriveParams& base, double step, std::size_t k,
                             const std::optional<MonteCarloRequest>& mc, ScanAxis axis) {
  DriveParams drive = base;
  SpectrumPoint point;
  if (axis == ScanAxis::Detuning) {
    drive.delta = base.delta + static_cast<double>(k) * step;
    point.axis_value = drive.delta;
  } else {
    drive.tau = base.tau + static_cast<double>(k) * step;
    point.axis_value = drive.tau;
  }
  point.p01_model = excitation_probability_coherent(drive);

  if (mc) {
    const double stay = 1.0 - point.p01_model;
    const Trajectory t = simulate_zeno(ChainProbabilities{stay, stay}, mc->n_measurements, counter_hash(mc->seed, k));
    const P01Estimate est = estimate_p01(t);
    point.p01_mc = est.value;
    point.std_error = est.std_error;
  }
  return point;
}

}  // namespace

std::vector<SpectrumPoint> scan_detuning(const DriveParams& base, double step, std::size_t count,
                                         const std::optional<MonteCarloRequest>& mc, ScanAxis axis,
                                         unsigned threads) {
  validate(base);
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "scan needs at least one point");
  if (!(std::isfinite(step) && step != 0.0)) throw Error(ErrorKind::InvalidArgument, "scan step must be nonzero");
  if (axis == ScanAxis::PulseLength && !(base.tau + static_cast<double>(count - 1) * step > 0.0 && base.tau > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "pulse-length scan reaches tau <= 0");
  }
  if (mc && mc->n_measurements < 2) {
    throw Error(ErrorKind::InvalidArgument, "Monte Carlo records need at least two measurements");
  }

  std::vector<SpectrumPoint> points(count);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));

  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) points[k] = evaluate_point(base, step, k, mc, axis);
    return points;
  }

  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < count; k += threads) points[k] = evaluate_point(base, step, k, mc, axis);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return points;
}

double delta_theta(double theta, double delta_omega, double tau) {
  if (!(theta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "theta must be >= 0");
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be > 0");
  const double x = tau * delta_omega;
  if (x == 0.0) return 0.0;
  // sqrt(theta^2 + x^2) - theta without cancellation.
  return x * x / (std::hypot(theta, x) + theta);
}

std::vector<ThetaCandidate> resolve_theta(double theta_app, double observed_residual, double delta_omega,
                                          double tau) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (!(theta_app > 0.0)) throw Error(ErrorKind::InvalidArgument, "approximate theta must be > 0");
  if (!(observed_residual >= 0.0 && observed_residual < two_pi)) {
    throw Error(ErrorKind::InvalidArgument, "residual must lie in [0, 2 pi)");
  }
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be > 0");

  const double x = std::abs(tau * delta_omega);
  std::vector<ThetaCandidate> out;
  for (long m = 0;; ++m) {
    const double dt = observed_residual + two_pi * static_cast<double>(m);
    if (dt >= x) break;
    if (dt <= 0.0) continue;
    ThetaCandidate c;
    c.branch = m;
    c.delta_theta = dt;
    c.theta = (x - dt) * (x + dt) / (2.0 * dt);
    c.n = static_cast<long long>(std::floor(c.theta / two_pi));
    c.distance = std::abs(c.theta - theta_app);
    out.push_back(c);
  }
  if (out.empty()) {
    throw Error(ErrorKind::NoPositiveCandidate, "tau * delta_omega is below every candidate increment");
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ThetaCandidate& l, const ThetaCandidate& r) { return l.distance < r.distance; });
  return out;
}

}  // namespace zeno
