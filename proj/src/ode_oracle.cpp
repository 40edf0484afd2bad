#include "zeno/ode_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "zeno/error.hpp"

namespace zeno {

namespace {

using Vec = std::array<double, 3>;

Vec rhs(const BlochRates& r, const Vec& y) {
  return {-r.gamma * y[0] + r.delta * y[1],
          -r.gamma * y[1] - r.delta * y[0] + r.omega * y[2],
          -r.omega * y[1] - r.big_gamma * (y[2] + 1.0)};
}

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
  Vec out = y;
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < 3; ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double initial_step(const BlochRates& r, double t_end) {
  const double scale = std::abs(r.omega) + std::abs(r.delta) + r.gamma + r.big_gamma;
  if (scale == 0.0) return t_end;
  return std::min(t_end, 1e-3 / scale);
}

}  // namespace

BlochState ode_oracle_evolve(const BlochState& initial, const BlochRates& rates, double t_end,
                             const OdeOptions& options, const BlochObserver& observer, OdeStats* stats) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw Error(ErrorKind::InvalidArgument, "integration end time must be finite and >= 0");
  }
  if (observer) observer(0.0, initial);
  if (t_end == 0.0) return initial;

  Vec y{initial.u, initial.v, initial.w};
  double t = 0.0;
  double h = initial_step(rates, t_end);
  Vec k1 = rhs(rates, y);
  OdeStats local;

  while (t < t_end) {
    if (local.accepted + local.rejected >= options.max_steps) {
      throw Error(ErrorKind::IntegrationFailure, "step budget exhausted before reaching t_end");
    }
    const bool last = t + h >= t_end;
    if (last) h = t_end - t;

    const Vec k2 = rhs(rates, axpy(y, h, {{a21, &k1}}));
    const Vec k3 = rhs(rates, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec k4 = rhs(rates, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec k5 = rhs(rates, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec k6 = rhs(rates, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Vec y_new = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const Vec k7 = rhs(rates, y_new);

    double err = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = options.atol + options.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err += (e / sc) * (e / sc);
    }
    err = std::sqrt(err / 3.0);

    if (!std::isfinite(err)) {
      throw Error(ErrorKind::IntegrationFailure, "non-finite error estimate");
    }

    if (err <= 1.0) {
      t = last ? t_end : t + h;
      y = y_new;
      k1 = k7;
      ++local.accepted;
      if (observer) observer(t, BlochState{y[0], y[1], y[2]});
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= factor;
    } else {
      ++local.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h <= 1e-15 * std::max(t_end, 1e-300)) {
        std::ostringstream msg;
        msg << "step size underflow at t = " << t;
        throw Error(ErrorKind::IntegrationFailure, msg.str());
      }
    }
  }

  if (stats) *stats = local;
  return BlochState{y[0], y[1], y[2]};
}

BlochState ode_oracle_evolve(const BlochState& initial, const DriveParams& drive, const RelaxationParams& relax,
                             double t_end, const OdeOptions& options) {
  validate(drive);
  validate(relax);
  return ode_oracle_evolve(initial, BlochRates::from(drive, relax), t_end, options);
}

double ode_transition_probability(Outcome start, const BlochRates& rates, double tau, const OdeOptions& options) {
  const BlochState initial = start == Outcome::On ? BlochState::ground() : BlochState::excited();
  const BlochState final_state = ode_oracle_evolve(initial, rates, tau, options);
  const double excited = final_state.excited_population();
  return start == Outcome::On ? excited : 1.0 - excited;
}

}  // namespace zeno
