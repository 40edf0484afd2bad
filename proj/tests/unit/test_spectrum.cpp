#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/property.hpp"
#include "zeno/bloch.hpp"
#include "zeno/error.hpp"
#include "zeno/spectrum.hpp"

using namespace zeno;
using std::numbers::pi;

TEST_CASE("scan_detuning: first point is the resonant value") {
  for (double omega_tau : {0.3, 2.0, 2 * pi * 578 + 1.0}) {
    const auto pts = scan_detuning(DriveParams{omega_tau / 2e-3, 0.0, 2e-3}, 100.0, 1);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].axis_value == 0.0);
    CHECK(pts[0].p01_model == doctest::Approx(std::pow(std::sin(omega_tau / 2), 2)).epsilon(1e-12));
    CHECK_FALSE(pts[0].p01_mc.has_value());
  }
}

TEST_CASE("scan_detuning: far wings vanish") {
  const auto pts = scan_detuning(DriveParams{1e3, 1e8, 2e-3}, 1e8, 3);
  for (const auto& p : pts) CHECK(p.p01_model < 1e-9);
}

TEST_CASE("scan_detuning: stroboscopic sampling advances the nutation per step") {
  const double tau = 2e-3;
  const double step = 2 * pi * 20e3;
  const double omega_tau = 2 * pi * 640;
  const auto pts = scan_detuning(DriveParams{omega_tau / tau, 0.0, tau}, step, 6);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double x = k * step * tau;
    const double theta = std::hypot(omega_tau, x);
    const double cos2chi = omega_tau * omega_tau / (theta * theta);
    CHECK(pts[k].axis_value == doctest::Approx(k * step));
    CHECK(pts[k].p01_model == doctest::Approx(cos2chi * std::pow(std::sin(theta / 2), 2)).epsilon(1e-9));
  }
  // First step: 2.4976 pi, close to 1.25 full cycles.
  CHECK(std::hypot(omega_tau, step * tau) - omega_tau == doctest::Approx(2.4976 * pi).epsilon(1e-4));
}

TEST_CASE("scan_detuning: Monte Carlo agrees with the model") {
  const double tau = 1e-3;
  const auto pts = scan_detuning(DriveParams{2.2 / tau, -3000.0, tau}, 250.0, 25, MonteCarloRequest{20000, 9},
                                 ScanAxis::Detuning, 4);
  for (const auto& p : pts) {
    REQUIRE(p.p01_mc.has_value());
    REQUIRE(p.std_error.has_value());
    CHECK(*p.std_error >= 0.0);
    CAPTURE(p.axis_value);
    CHECK(std::abs(*p.p01_mc - p.p01_model) <= 3 * *p.std_error + 1e-12);
  }
}

TEST_CASE("scan_detuning: thread count does not change results") {
  const DriveParams base{2000.0, -500.0, 1e-3};
  const auto one = scan_detuning(base, 37.0, 17, MonteCarloRequest{300, 4}, ScanAxis::Detuning, 1);
  const auto many = scan_detuning(base, 37.0, 17, MonteCarloRequest{300, 4}, ScanAxis::Detuning, 5);
  for (std::size_t k = 0; k < one.size(); ++k) {
    CHECK(one[k].p01_model == many[k].p01_model);
    CHECK(one[k].p01_mc == many[k].p01_mc);
  }
}

TEST_CASE("scan_detuning: pulse-length axis") {
  const auto pts = scan_detuning(DriveParams{pi, 0.0, 0.5}, 0.25, 3, std::nullopt, ScanAxis::PulseLength);
  CHECK(pts[0].axis_value == 0.5);
  CHECK(pts[1].p01_model == doctest::Approx(std::pow(std::sin(0.75 * pi / 2), 2)));
  CHECK(pts[2].p01_model == doctest::Approx(1.0));
  CHECK_THROWS_AS(scan_detuning(DriveParams{pi, 0.0, 0.5}, -0.25, 3, std::nullopt, ScanAxis::PulseLength), Error);
}

TEST_CASE("scan_detuning: argument checks") {
  CHECK_THROWS_AS(scan_detuning(DriveParams{1.0, 0.0, 1.0}, 0.0, 3), Error);
  CHECK_THROWS_AS(scan_detuning(DriveParams{1.0, 0.0, 1.0}, 1.0, 0), Error);
}

TEST_CASE("delta_theta examples") {
  CHECK(delta_theta(0.0, pi, 1.0) == doctest::Approx(pi));
  CHECK(delta_theta(2 * pi * 640, 2 * pi * 20e3, 2e-3) / pi == doctest::Approx(2.4976).epsilon(1e-4));
  CHECK(delta_theta(2 * pi * 640, 0.0, 2e-3) == 0.0);
  CHECK_THROWS_AS(delta_theta(-1.0, 1.0, 1.0), Error);
}

TEST_CASE("property: delta_theta decreases strictly in theta") {
  testing::Gen gen(41);
  for (int i = 0; i < 2000; ++i) {
    const double x = gen.uniform(1e-3, 500.0);
    const double t1 = gen.uniform(0.0, 1e4);
    const double t2 = t1 * (1.0 + gen.uniform(1e-6, 1.0)) + 1e-9;
    CHECK(delta_theta(t2, x, 1.0) < delta_theta(t1, x, 1.0));
  }
}

TEST_CASE("resolve_theta: calibration example") {
  const auto c = resolve_theta(578 * 2 * pi, 0.5 * pi, 2 * pi * 20e3, 2e-3);
  REQUIRE_FALSE(c.empty());
  CHECK(c[0].branch == 1);
  CHECK(c[0].delta_theta == doctest::Approx(2.5 * pi));
  CHECK(c[0].theta == doctest::Approx(1278.75 * pi));
  CHECK(c[0].n == 639);
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i].distance >= c[i - 1].distance);
}

TEST_CASE("property: resolve_theta inverts delta_theta") {
  testing::Gen gen(42);
  const double tau = 2e-3;
  const double delta_omega = 2 * pi * 20e3;
  for (int i = 0; i < 1000; ++i) {
    const double theta = gen.uniform(10 * 2 * pi, 1000 * 2 * pi);
    const double dt = delta_theta(theta, delta_omega, tau);
    const double residual = std::fmod(dt, 2 * pi);
    const auto c = resolve_theta(theta * (1.0 + gen.uniform(-0.05, 0.05)), residual, delta_omega, tau);
    const long branch = static_cast<long>(std::floor(dt / (2 * pi)));
    bool found = false;
    for (const auto& cand : c) {
      if (cand.branch == branch) {
        CHECK(cand.theta == doctest::Approx(theta).epsilon(1e-9));
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("resolve_theta: no candidate below the increment") {
  try {
    resolve_theta(100.0, 2.0, 1.0, 1.0);
    FAIL("expected NoPositiveCandidate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoPositiveCandidate);
  }
  CHECK_THROWS_AS(resolve_theta(100.0, 7.0, 1e3, 1.0), Error);
  CHECK_THROWS_AS(resolve_theta(0.0, 1.0, 1e3, 1.0), Error);
}
