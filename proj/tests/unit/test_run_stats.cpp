#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numbers>

#include "../support/enumeration.hpp"
#include "../support/property.hpp"
#include "zeno/error.hpp"
#include "zeno/run_stats.hpp"
#include "zeno/trajectory.hpp"

using namespace zeno;
using std::numbers::pi;
using Rational = boost::multiprecision::cpp_rational;

namespace {

constexpr Outcome On = Outcome::On;
constexpr Outcome Off = Outcome::Off;

std::vector<Outcome> random_record(testing::Gen& gen, std::size_t n) {
  std::vector<Outcome> out(n);
  for (auto& o : out) o = gen.coin() ? On : Off;
  return out;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected zeno::Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("estimate_p01 examples") {
  const std::vector<Outcome> five{On, Off, On, On, Off};
  const auto est = estimate_p01(five);
  CHECK(est.value == doctest::Approx(2.0 / 3.0));
  CHECK(est.transitions == 2);
  CHECK(est.on_events == 3);
  CHECK(est.std_error == doctest::Approx(std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / 3.0)));

  CHECK(estimate_p01(std::vector<Outcome>(10, On)).value == 0.0);
  CHECK(kind_of([] { estimate_p01(std::vector<Outcome>(10, Off)); }) == ErrorKind::NoOnEvents);
  CHECK(kind_of([] { estimate_p01(std::vector<Outcome>{Off, Off, On}); }) == ErrorKind::NoOnEvents);
}

TEST_CASE("estimate_p01 recovers 1 - p0") {
  const auto t = simulate_zeno(ChainProbabilities{0.75, 0.6}, 1000000, 12);
  const auto est = estimate_p01(t);
  CHECK(std::abs(est.value - 0.25) < 0.002);
  CHECK(std::abs(est.value - 0.25) < 3 * est.std_error);
}

TEST_CASE("run_length_histogram examples") {
  const auto h = run_length_histogram(std::vector<Outcome>{On, On, On, Off, Off, On, On});
  CHECK(h.counts_on == std::map<std::size_t, std::size_t>{{2, 1}, {3, 1}});
  CHECK(h.counts_off == std::map<std::size_t, std::size_t>{{2, 1}});
  CHECK(h.n_measurements == 7);
  CHECK(h.max_run() == 3);

  const auto single = run_length_histogram(std::vector<Outcome>{Off});
  CHECK(single.counts_off == std::map<std::size_t, std::size_t>{{1, 1}});
  CHECK(single.counts_on.empty());
}

TEST_CASE("property: run counts conserve the record length") {
  testing::Gen gen(21);
  for (int i = 0; i < 500; ++i) {
    const auto record = random_record(gen, gen.integer(1, 400));
    const auto h = run_length_histogram(record);
    CHECK(h.covered() == record.size());
    std::size_t switches = 0;
    for (std::size_t k = 1; k < record.size(); ++k) switches += record[k] != record[k - 1];
    CHECK(h.runs(On) + h.runs(Off) == switches + 1);
  }
}

TEST_CASE("property: histogram merge is associative and commutative") {
  testing::Gen gen(22);
  for (int i = 0; i < 100; ++i) {
    const auto a = run_length_histogram(random_record(gen, gen.integer(1, 60)));
    const auto b = run_length_histogram(random_record(gen, gen.integer(1, 60)));
    const auto c = run_length_histogram(random_record(gen, gen.integer(1, 60)));
    auto left = a;
    left.merge(b).merge(c);
    auto bc = b;
    bc.merge(c);
    auto right = a;
    right.merge(bc);
    auto swapped = c;
    swapped.merge(a).merge(b);
    CHECK(left == right);
    CHECK(left == swapped);
    CHECK(left.covered() == left.n_measurements);
  }
}

TEST_CASE("normalized_ratios examples") {
  RunLengthHistogram h;
  h.counts_on = {{1, 8}, {2, 4}, {3, 2}};
  h.counts_off = {{1, 5}};
  CHECK(normalized_ratios(h, On) == std::map<std::size_t, double>{{1, 1.0}, {2, 0.5}, {3, 0.25}});
  CHECK(normalized_ratios(h, Off) == std::map<std::size_t, double>{{1, 1.0}});
  h.counts_off = {{2, 3}};
  CHECK(kind_of([&] { normalized_ratios(h, Off); }) == ErrorKind::NoUnitRuns);
}

TEST_CASE("normalized_ratios follow p^(q-1) for long records") {
  const auto h = run_length_histogram(simulate_zeno(ChainProbabilities{0.7, 0.7}, 1000000, 5));
  const auto r = normalized_ratios(h, On);
  for (std::size_t q = 2; q <= 6; ++q) CHECK(std::abs(r.at(q) - std::pow(0.7, q - 1.0)) < 0.01);
}

TEST_CASE("model_curve examples") {
  CHECK(model_curve(Model::Zeno, 0.5, 0, 3).at(3) == 0.25);
  CHECK(model_curve(Model::Zeno, 0.5, 500, 3).at(3) == doctest::Approx(0.249).epsilon(1e-15));
  CHECK(model_curve(Model::Coherent, pi / 2, 500, 3).at(3) == 0.0);
  CHECK(model_curve(Model::Coherent, pi / 2, 500, 3).at(2) == doctest::Approx(0.5 * 499 / 500));
  CHECK_THROWS_AS(model_curve(Model::Zeno, 0.5, 500, 3).at(4), Error);
  CHECK_THROWS_AS(model_curve(Model::Zeno, 1.5, 500, 3), Error);
  CHECK_THROWS_AS(model_curve(Model::Zeno, 0.5, 5, 6), Error);
  CHECK_THROWS_AS(model_curve(Model::Zeno, 0.5, 5, 0), Error);
}

TEST_CASE("property: model curves start at 1 and stay in [0, 1]") {
  testing::Gen gen(23);
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = gen.integer(1, 1000);
    const std::size_t q_max = gen.integer(1, n);
    const auto curve = gen.coin() ? model_curve(Model::Zeno, gen.uniform(0.0, 1.0), n, q_max)
                                  : model_curve(Model::Coherent, gen.uniform(-100.0, 100.0), n, q_max);
    CHECK(curve.at(1) == 1.0);
    for (double v : curve.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("enumeration: windowed counting reproduces the finite-record factor exactly") {
  // The (N - q + 1) / N factor is exact for overlapping windows of q identical
  // results under the stationary chain, for any p0, p1.
  const Rational p0(3, 4);
  const Rational p1(2, 5);
  const Rational start = (1 - p1) / ((1 - p0) + (1 - p1));
  const std::size_t n = 10;
  const auto e = testing::enumerate_runs<Rational>(n, p0, p1, start);
  for (std::size_t q = 1; q <= n; ++q) {
    Rational power = 1;
    for (std::size_t k = 1; k < q; ++k) power *= p0;
    CAPTURE(q);
    CHECK(e.windows[0].at(q) / e.windows[0].at(1) == power * Rational(n - q + 1, n));
  }
}

TEST_CASE("enumeration: exact-q and at-least-q ratios at p = 1/2 differ at finite N") {
  // Closed forms for maximal runs: exactly q gives 2^-(q-1) (N-q+3)/(N+2) for
  // q < N, at least q gives 2^-(q-1) (N-q+2)/(N+1). Both tend to 2^-(q-1).
  const Rational half(1, 2);
  for (std::size_t n : {4u, 9u, 14u}) {
    const auto e = testing::enumerate_runs<Rational>(n, half, half, half);
    for (std::size_t q = 1; q < n; ++q) {
      Rational power = 1;
      for (std::size_t k = 1; k < q; ++k) power *= half;
      CAPTURE(n);
      CAPTURE(q);
      const Rational exact = e.exact[0].at(q) / e.exact[0].at(1);
      const Rational at_least = e.at_least[0].at(q) / e.at_least[0].at(1);
      CHECK(exact == power * Rational(n - q + 3, n + 2));
      CHECK(at_least == power * Rational(n - q + 2, n + 1));
      if (q > 1) CHECK(exact != at_least);
    }
  }
}

TEST_CASE("enumeration: mean histogram over seeds at N = 12") {
  const std::size_t n = 12;
  const std::size_t seeds = 100000;
  const auto e = testing::enumerate_runs<double>(n, 0.5, 0.5, 0.5);
  RunLengthHistogram total;
  for (std::uint64_t s = 0; s < seeds; ++s) total.merge(run_length_histogram(simulate_zeno({0.5, 0.5}, n, s)));
  for (int o = 0; o < 2; ++o) {
    const Outcome outcome = o == 0 ? On : Off;
    for (std::size_t q = 1; q <= 6; ++q) {
      const double mean = e.exact[o].at(q);
      const double var = e.exact_sq[o].at(q) - mean * mean;
      const double observed = static_cast<double>(total.count(outcome, q)) / seeds;
      CAPTURE(q);
      CHECK(std::abs(observed - mean) < 3 * std::sqrt(var / seeds));
    }
  }
}

TEST_CASE("discriminate: generating model is preferred") {
  std::size_t zeno_right = 0;
  std::size_t coherent_right = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto z = run_length_histogram(simulate_zeno({0.5, 0.5}, 500, s));
    zeno_right += discriminate_record(z, {0.5, 0.5}, pi / 2).verdict() == Verdict::Zeno;
    const auto c = run_length_histogram(simulate_coherent(pi / 2, 500, s));
    coherent_right += discriminate_record(c, {0.5, 0.5}, pi / 2).verdict() == Verdict::Coherent;
  }
  CHECK(zeno_right > 50);
  CHECK(coherent_right > 50);
}

TEST_CASE("discriminate: error paths") {
  const auto h = run_length_histogram(std::vector<Outcome>{On, On, On, Off});
  CHECK(kind_of([&] {
          discriminate(h, model_curve(Model::Zeno, 1.0, 0, 4), model_curve(Model::Coherent, 2 * pi, 0, 4));
        }) == ErrorKind::DegenerateModels);
  CHECK(kind_of([&] { discriminate_record(h, {1.0, 1.0}, 2 * pi); }) == ErrorKind::DegenerateModels);
  CHECK(kind_of([&] {
          discriminate(h, model_curve(Model::Zeno, 0.0, 0, 4), model_curve(Model::Coherent, pi / 2, 0, 4));
        }) == ErrorKind::ZeroLikelihoodBothModels);
  CHECK(kind_of([&] {
          discriminate(h, model_curve(Model::Zeno, 0.5, 0, 2), model_curve(Model::Coherent, pi / 2, 0, 2));
        }) == ErrorKind::InvalidArgument);

  const auto d = discriminate(h, model_curve(Model::Zeno, 0.5, 0, 4), model_curve(Model::Coherent, pi / 2, 0, 4));
  CHECK(d.log_likelihood_ratio() == std::numeric_limits<double>::infinity());
  CHECK(d.verdict() == Verdict::Zeno);
  CHECK(d.runs == 2);
}

TEST_CASE("discriminate: log-likelihoods by hand") {
  // Runs {1: 2, 2: 1}; Zeno p = 1/2 over q = 1..2 gives (2/3, 1/3); the
  // coherent law at pi/2 gives the same. Use p = 1/4 instead: (4/5, 1/5).
  RunLengthHistogram h;
  h.n_measurements = 4;
  h.counts_on = {{1, 1}, {2, 1}};
  h.counts_off = {{1, 1}};
  const auto d = discriminate(h, model_curve(Model::Zeno, 0.25, 0, 2), model_curve(Model::Coherent, pi / 2, 0, 2));
  CHECK(d.log_likelihood_zeno == doctest::Approx(2 * std::log(0.8) + std::log(0.2)));
  CHECK(d.log_likelihood_coherent == doctest::Approx(2 * std::log(2.0 / 3.0) + std::log(1.0 / 3.0)));
  CHECK(d.verdict() == Verdict::Coherent);
}
