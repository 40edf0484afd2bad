#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/property.hpp"
#include "zeno/bloch.hpp"
#include "zeno/error.hpp"
#include "zeno/fitting.hpp"
#include "zeno/run_stats.hpp"
#include "zeno/trajectory.hpp"

using namespace zeno;
using std::numbers::pi;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected zeno::Error");
  return ErrorKind::InvalidArgument;
}

// Noiseless ratios p^(q-1) (N - q + 1) / N, computed from the closed form
// directly rather than through model_curve.
RunSeries forward(double p, std::size_t n, std::size_t q_max) {
  RunSeries s;
  for (std::size_t q = 1; q <= q_max; ++q) {
    s.ratios[q] = std::pow(p, q - 1.0) * (static_cast<double>(n) - q + 1.0) / n;
  }
  return s;
}

double mirror_distance(double fitted, double truth) {
  const double d = std::abs(fitted - truth);
  const double m = std::abs((2 * pi - fitted) - truth);
  return std::min(d, m);
}

}  // namespace

TEST_CASE("fit_contrast examples") {
  const auto ext = contrast_extremes(0.49, 0.38, 0.5);
  CHECK(ext.p_max == doctest::Approx(0.4126).epsilon(1e-3));
  CHECK(ext.p_min == doctest::Approx(0.0775).epsilon(2e-3));
  const auto fit = fit_contrast(ext.p_max, ext.p_min, 0.5);
  CHECK(fit.b0 == doctest::Approx(0.49).epsilon(1e-14));
  CHECK(fit.a_plus_b == doctest::Approx(0.38).epsilon(1e-14));

  CHECK(fit_contrast(0.2, 0.1, 1.0).a_plus_b == doctest::Approx(std::log(3.0)));
  CHECK(kind_of([] { fit_contrast(0.2, 0.2, 0.5); }) == ErrorKind::InfeasibleContrast);
  CHECK(kind_of([] { fit_contrast(0.0, 0.0, 0.5); }) == ErrorKind::InfeasibleContrast);
  CHECK(kind_of([] { fit_contrast(0.1, 0.2, 0.5); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { fit_contrast(0.2, 0.1, 0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("contrast extremes match the exact formula at large theta") {
  const double a_plus_b = 0.395;
  const auto ext = contrast_extremes(0.49, a_plus_b, 0.5);
  double hi = 0.0;
  double lo = 1.0;
  for (int i = 0; i <= 4000; ++i) {
    const double theta = 2 * pi * 640 + 2 * pi * i / 4000.0;
    const auto d = with_contrast(bloch_params_from_phase(theta, a_plus_b), 0.49);
    const double p01 = 1.0 - survival_probability(Outcome::On, d, {0.5, 1.0});
    hi = std::max(hi, p01);
    lo = std::min(lo, p01);
  }
  // Dropped terms are O((a + b) / theta), about 1e-4.
  CHECK(std::abs(hi - ext.p_max) < 2e-4);
  CHECK(std::abs(lo - ext.p_min) < 2e-4);
}

TEST_CASE("fit_run_lengths: noiseless data at the published phase") {
  const RunFitFixed fixed;
  const double theta_prime = (1 + 1e-4) * pi;
  const auto chain = run_fit_chain(theta_prime, 1.0, fixed);
  const auto fit = fit_run_lengths(forward(chain.p0, 500, 12), forward(chain.p1, 500, 6), fixed, 500);
  CHECK(fit.converged);
  CHECK(std::abs(fit.param("theta_prime") - theta_prime) <= 1e-3 * pi);
  CHECK(std::abs(fit.param("f1") - 1.0) <= 0.01);
  CHECK(fit.residual < 1e-12);
  CHECK(fit.param("theta_prime_mirror") == doctest::Approx(2 * pi - fit.param("theta_prime")));
  CHECK(fit.param("theta") == doctest::Approx(2 * pi * 640 + fit.param("theta_prime")));
}

// theta' and its mirror 2 pi - theta' both fit noiseless data exactly: the
// mirror phase reproduces p0, and f1 absorbs the O((a + b) / theta) change in p1.
TEST_CASE("noiseless data have an exact mirror solution") {
  const RunFitFixed fixed;
  const double theta_prime = 0.3 * pi;
  const auto chain = run_fit_chain(theta_prime, 0.6, fixed);
  const auto fit = fit_run_lengths(forward(chain.p0, 500, 10), forward(chain.p1, 500, 10), fixed, 500);
  CHECK(fit.residual < 1e-20);
  const double other = fit.param("theta_prime") < pi ? 2 * pi - theta_prime : theta_prime;
  CHECK(std::abs(other - fit.param("theta_prime")) > 1.0);
  CHECK(mirror_distance(fit.param("theta_prime"), theta_prime) <= 1e-3 * pi);
}

TEST_CASE("property: noiseless round trip over the parameter box") {
  testing::Gen gen(61);
  const RunFitFixed fixed;
  for (int i = 0; i < 12; ++i) {
    const double theta_prime = gen.uniform(0.02 * pi, 1.98 * pi);
    const double f1 = gen.uniform(0.2, 1.0);
    const auto chain = run_fit_chain(theta_prime, f1, fixed);
    const auto fit = fit_run_lengths(forward(chain.p0, 500, 10), forward(chain.p1, 500, 10), fixed, 500);
    CAPTURE(theta_prime);
    CAPTURE(f1);
    CHECK(mirror_distance(fit.param("theta_prime"), theta_prime) <= 1e-3 * pi);
    CHECK(std::abs(fit.param("f1") - f1) <= 0.01);
    CHECK(fit.residual >= 0.0);
    CHECK(fit.param("theta_prime") >= 0.0);
    CHECK(fit.param("theta_prime") < 2 * pi);
    CHECK(fit.param("p0") >= 0.0);
    CHECK(fit.param("p1") <= 1.0);
  }
}

TEST_CASE("fit_run_lengths: residual never increases during refinement") {
  testing::Gen gen(62);
  for (int i = 0; i < 6; ++i) {
    const double theta_prime = gen.uniform(0.1, 2 * pi - 0.1);
    const double f1 = gen.uniform(0.3, 1.0);
    const auto chain = run_fit_chain(theta_prime, f1, {});
    const auto t = simulate_zeno(chain, 20000, 100 + i);
    const auto hist = run_length_histogram(t);
    const auto fit = fit_run_lengths(run_series(hist, Outcome::On), run_series(hist, Outcome::Off), {}, t.size());
    REQUIRE_FALSE(fit.residual_history.empty());
    for (std::size_t k = 1; k < fit.residual_history.size(); ++k) {
      CHECK(fit.residual_history[k] <= fit.residual_history[k - 1]);
    }
    CHECK(fit.residual == doctest::Approx(fit.residual_history.back()).epsilon(1e-12));
  }
}

TEST_CASE("fit_run_lengths: scaling all counts leaves the fit unchanged") {
  const auto chain = run_fit_chain(0.6 * pi, 0.7, {});
  const auto t = simulate_zeno(chain, 30000, 77);
  const auto hist = run_length_histogram(t);
  RunLengthHistogram tripled = hist;
  tripled.merge(hist).merge(hist);
  const auto a = fit_run_lengths(run_series(hist, Outcome::On), run_series(hist, Outcome::Off), {}, t.size());
  const auto b = fit_run_lengths(run_series(tripled, Outcome::On), run_series(tripled, Outcome::Off), {}, t.size());
  CHECK(b.param("theta_prime") == doctest::Approx(a.param("theta_prime")).epsilon(1e-9));
  CHECK(b.param("f1") == doctest::Approx(a.param("f1")).epsilon(1e-9));
}

TEST_CASE("fit_run_lengths: stochastic recovery at N = 1e5") {
  const double theta_prime = 0.5 * pi;
  const double f1 = 0.8;
  const auto chain = run_fit_chain(theta_prime, f1, {});
  const auto t = simulate_zeno(chain, 100000, 2718);
  const auto hist = run_length_histogram(t);
  for (FitMode mode : {FitMode::Joint, FitMode::TwoStage}) {
    RunFitOptions options;
    options.mode = mode;
    const auto fit =
        fit_run_lengths(run_series(hist, Outcome::On), run_series(hist, Outcome::Off), {}, t.size(), options);
    CHECK(mirror_distance(fit.param("theta_prime"), theta_prime) <= 0.01 * pi);
    CHECK(std::abs(fit.param("f1") - f1) <= 0.05);
  }
}

TEST_CASE("run_series weights") {
  RunLengthHistogram hist;
  hist.n_measurements = 60;
  hist.counts_on = {{1, 40}, {2, 10}};
  const auto counts = run_series(hist, Outcome::On, RunWeighting::RunCount);
  CHECK(counts.weights.at(1) == 40.0);
  CHECK(counts.weights.at(2) == 10.0);
  CHECK(counts.ratios.at(2) == 0.25);
  // 1 / (R^2 (1/U(q) + 1/U(1))) with R = 1/4.
  const auto inverse = run_series(hist, Outcome::On);
  CHECK(inverse.weights.at(2) == doctest::Approx(1.0 / (0.0625 * (0.1 + 0.025))).epsilon(1e-14));
  CHECK(inverse.weights.at(1) == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("property: stochastic fits converge for both weightings") {
  testing::Gen gen(29);
  for (int i = 0; i < 40; ++i) {
    const double theta_prime = gen.uniform(0.05, 2 * pi - 0.05);
    const double f1 = gen.uniform(0.05, 1.0);
    const std::size_t n = gen.coin() ? 5000 : 100000;
    const auto t = simulate_zeno(run_fit_chain(theta_prime, f1, {}), n, 500 + i);
    const auto hist = run_length_histogram(t);
    CAPTURE(theta_prime);
    CAPTURE(f1);
    for (RunWeighting w : {RunWeighting::InverseVariance, RunWeighting::RunCount}) {
      for (FitMode mode : {FitMode::Joint, FitMode::TwoStage}) {
        RunFitOptions options;
        options.mode = mode;
        try {
          const auto fit =
              fit_run_lengths(run_series(hist, Outcome::On, w), run_series(hist, Outcome::Off, w), {}, n, options);
          CHECK(fit.converged);
        } catch (const Error& e) {
          // Short records at extreme p can lack unit runs or distinct lengths.
          CHECK((e.kind() == ErrorKind::DataTooSparse || e.kind() == ErrorKind::NoUnitRuns));
        }
      }
    }
  }
}

TEST_CASE("fit_run_lengths: two-stage matches joint on noiseless data") {
  const auto chain = run_fit_chain(1.3 * pi, 0.55, {});
  RunFitOptions two;
  two.mode = FitMode::TwoStage;
  const auto joint = fit_run_lengths(forward(chain.p0, 500, 8), forward(chain.p1, 500, 8), {}, 500);
  const auto staged = fit_run_lengths(forward(chain.p0, 500, 8), forward(chain.p1, 500, 8), {}, 500, two);
  CHECK(staged.param("theta_prime") == doctest::Approx(joint.param("theta_prime")).epsilon(1e-6));
  CHECK(staged.param("f1") == doctest::Approx(joint.param("f1")).epsilon(1e-6));
}

TEST_CASE("fit_run_lengths: error paths") {
  const auto chain = run_fit_chain(0.5 * pi, 1.0, {});
  CHECK(kind_of([&] { fit_run_lengths(forward(chain.p0, 500, 1), forward(chain.p1, 500, 1), {}, 500); }) ==
        ErrorKind::DataTooSparse);
  CHECK(kind_of([&] { fit_run_lengths(forward(chain.p0, 500, 5), RunSeries{}, {}, 500); }) ==
        ErrorKind::DataTooSparse);
  RunSeries no_unit = forward(chain.p0, 500, 5);
  no_unit.ratios.erase(1);
  CHECK(kind_of([&] { fit_run_lengths(no_unit, forward(chain.p1, 500, 5), {}, 500); }) ==
        ErrorKind::InvalidArgument);
  RunFitFixed bad;
  bad.b0 = 0.7;
  CHECK(kind_of([&] { fit_run_lengths(forward(chain.p0, 500, 5), forward(chain.p1, 500, 5), bad, 500); }) ==
        ErrorKind::InvalidArgument);

  const auto t = simulate_zeno(run_fit_chain(0.4 * pi, 0.6, {}), 5000, 1);
  const auto hist = run_length_histogram(t);
  RunFitOptions capped;
  capped.max_iterations = 0;
  CHECK(kind_of([&] {
          fit_run_lengths(run_series(hist, Outcome::On), run_series(hist, Outcome::Off), {}, t.size(), capped);
        }) == ErrorKind::NonConvergence);
}

TEST_CASE("run_fit_objective is zero at the generating parameters") {
  const auto chain = run_fit_chain(0.9 * pi, 0.4, {});
  CHECK(run_fit_objective(forward(chain.p0, 500, 6), forward(chain.p1, 500, 6), {}, 500, 0.9 * pi, 0.4) <
        1e-28);
  CHECK(run_fit_objective(forward(chain.p0, 500, 6), forward(chain.p1, 500, 6), {}, 500, 0.5 * pi, 0.4) > 1e-6);
}
