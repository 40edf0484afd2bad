#include "zeno/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "zeno/bloch.hpp"
#include "zeno/error.hpp"

namespace zeno {

ContrastExtremes contrast_extremes(double b0, double a_plus_b, double f0) {
  const double base = f0 * b0;
  const double damping = std::exp(-a_plus_b);
  return {base * (1.0 + damping), base * (1.0 - damping)};
}

ContrastFit fit_contrast(double p_max, double p_min, double f0) {
  if (!(f0 > 0.0 && f0 <= 1.0)) throw Error(ErrorKind::InvalidArgument, "f0 must lie in (0, 1]");
  if (!(p_min >= 0.0 && p_max <= 1.0 && p_min <= p_max)) {
    throw Error(ErrorKind::InvalidArgument, "need 0 <= p_min <= p_max <= 1");
  }
  const double total = p_max + p_min;
  if (!(total > 0.0)) throw Error(ErrorKind::InfeasibleContrast, "p_max + p_min is zero");
  const double ratio = (p_max - p_min) / total;
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw Error(ErrorKind::InfeasibleContrast, "zero contrast: exp(-(a+b)) would vanish");
  }
  ContrastFit fit;
  fit.b0 = 0.5 * total / f0;
  fit.a_plus_b = -std::log(ratio);
  if (fit.b0 > 1.0) throw Error(ErrorKind::InfeasibleContrast, "contrast implies B0 > 1 for this f0");
  return fit;
}

RunSeries run_series(const RunLengthHistogram& hist, Outcome outcome, RunWeighting weighting) {
  RunSeries s;
  s.ratios = normalized_ratios(hist, outcome);
  const double unit = static_cast<double>(hist.count(outcome, 1));
  for (const auto& [q, c] : hist.counts(outcome)) {
    const double count = static_cast<double>(c);
    // Var(U(q)/U(1)) ~ R^2 (1/U(q) + 1/U(1)) for multinomial counts.
    s.weights[q] = weighting == RunWeighting::RunCount ? count : unit * unit * unit / (count * (unit + count));
  }
  return s;
}

RunSeries run_series(const std::map<std::size_t, double>& ratios) { return RunSeries{ratios, {}}; }

double FitResult::param(std::string_view name) const {
  const auto it = parameters.find(std::string(name));
  if (it == parameters.end()) throw std::out_of_range("no fit parameter " + std::string(name));
  return it->second;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kF1Floor = 1e-9;
constexpr double kComplexStep = 1e-20;

double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r >= kTwoPi ? 0.0 : r;
}

double checked_probability(double p) {
  if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "fixed parameters give a repeat probability " << p << " outside [0, 1]";
    throw Error(ErrorKind::InvalidProbability, msg.str());
  }
  return std::clamp(p, 0.0, 1.0);
}

struct Probabilities {
  double p0 = 0.0;
  double p1 = 0.0;
  double dp0_dtheta = 0.0;
  double dp1_dtheta = 0.0;
  double dp1_df1 = 0.0;
};

Probabilities probabilities(double theta_prime, double f1, const RunFitFixed& fixed) {
  const double whole = kTwoPi * static_cast<double>(fixed.n_cycles);
  const std::complex<double> z(theta_prime, kComplexStep);
  const auto on =
      detail::survival_at_phase(Outcome::On, whole, z, fixed.a_plus_b, fixed.a_minus_b, fixed.b0, fixed.f0);
  const auto off =
      detail::survival_at_phase(Outcome::Off, whole, z, fixed.a_plus_b, fixed.a_minus_b, 1.0 - fixed.b0, f1);
  Probabilities p;
  p.p0 = checked_probability(on.real());
  p.p1 = checked_probability(off.real());
  p.dp0_dtheta = on.imag() / kComplexStep;
  p.dp1_dtheta = off.imag() / kComplexStep;
  p.dp1_df1 = (off.real() - 1.0) / f1;
  return p;
}

struct DataPoint {
  Outcome part;
  std::size_t q;
  double ratio;
  double weight;
  double finite;
};

enum Param { kTheta = 0, kF1 = 1 };

struct Evaluation {
  double value = 0.0;
  std::array<double, 2> gn_rhs{};                // sum w r dm/dx
  std::array<std::array<double, 2>, 2> gn_hessian{};  // sum w dm/dx dm/dx^T
  std::array<double, 2> gradient() const { return {-2.0 * gn_rhs[0], -2.0 * gn_rhs[1]}; }
};

class Problem {
 public:
  Problem(const RunSeries& on, const RunSeries& off, const RunFitFixed& fixed, std::size_t n)
      : fixed_(fixed) {
    if (!(fixed.a_plus_b >= 0.0) || std::abs(fixed.a_minus_b) > fixed.a_plus_b) {
      throw Error(ErrorKind::InvalidArgument, "fixed a + b must be >= |a - b|");
    }
    if (!(fixed.b0 > 0.0 && fixed.b0 <= 0.5)) throw Error(ErrorKind::InvalidArgument, "fixed B0 must lie in (0, 1/2]");
    if (!(fixed.f0 > 0.0 && fixed.f0 <= 1.0)) throw Error(ErrorKind::InvalidArgument, "fixed f0 must lie in (0, 1]");
    if (fixed.n_cycles < 0) throw Error(ErrorKind::InvalidArgument, "cycle count must be >= 0");

    std::set<std::size_t> distinct;
    add(on, Outcome::On, n, distinct);
    add(off, Outcome::Off, n, distinct);
    if (on.ratios.empty() || off.ratios.empty() || distinct.size() < 3) {
      throw Error(ErrorKind::DataTooSparse, "need both outcome series and at least 3 distinct run lengths");
    }
  }

  const RunFitFixed& fixed() const noexcept { return fixed_; }
  const std::vector<DataPoint>& points() const noexcept { return points_; }

  double total_weight(bool use_on, bool use_off) const {
    double total = 0.0;
    for (const auto& d : points_) {
      if ((d.part == Outcome::On && use_on) || (d.part == Outcome::Off && use_off)) total += d.weight;
    }
    return total;
  }

  Evaluation evaluate(double theta_prime, double f1, bool use_on, bool use_off) const {
    const Probabilities pr = probabilities(theta_prime, f1, fixed_);
    const double norm = 1.0 / total_weight(use_on, use_off);
    Evaluation e;
    for (const auto& d : points_) {
      const bool on = d.part == Outcome::On;
      if ((on && !use_on) || (!on && !use_off)) continue;
      const double p = on ? pr.p0 : pr.p1;
      const double k = static_cast<double>(d.q - 1);
      const double model = d.finite * std::pow(p, k);
      const double dm_dp = d.q >= 2 ? d.finite * k * std::pow(p, k - 1.0) : 0.0;
      const std::array<double, 2> dm{dm_dp * (on ? pr.dp0_dtheta : pr.dp1_dtheta), on ? 0.0 : dm_dp * pr.dp1_df1};
      const double w = d.weight * norm;
      const double r = d.ratio - model;
      e.value += w * r * r;
      for (int i = 0; i < 2; ++i) {
        e.gn_rhs[i] += w * r * dm[i];
        for (int j = 0; j < 2; ++j) e.gn_hessian[i][j] += w * dm[i] * dm[j];
      }
    }
    return e;
  }

 private:
  void add(const RunSeries& s, Outcome part, std::size_t n, std::set<std::size_t>& distinct) {
    if (!s.ratios.empty() && !s.ratios.contains(1)) {
      throw Error(ErrorKind::InvalidArgument, "run-length ratios must include q = 1");
    }
    for (const auto& [q, ratio] : s.ratios) {
      if (q < 1 || (n != 0 && q > n)) throw Error(ErrorKind::InvalidArgument, "run length outside 1..N");
      const auto w = s.weights.find(q);
      const double weight = w == s.weights.end() ? 1.0 : w->second;
      if (!(weight >= 0.0) || !std::isfinite(ratio)) throw Error(ErrorKind::InvalidArgument, "bad ratio or weight");
      const double finite = n == 0 ? 1.0 : (static_cast<double>(n) - static_cast<double>(q) + 1.0) / static_cast<double>(n);
      points_.push_back({part, q, ratio, weight, finite});
      distinct.insert(q);
    }
  }

  RunFitFixed fixed_;
  std::vector<DataPoint> points_;
};

struct Refinement {
  double theta_prime = 0.0;
  double f1 = 1.0;
  double value = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

// Projected gradient: components pushing against an active bound are dropped.
std::array<double, 2> projected(std::array<double, 2> g, double f1, const std::array<bool, 2>& active) {
  if (!active[kTheta]) g[kTheta] = 0.0;
  if (!active[kF1]) {
    g[kF1] = 0.0;
  } else if ((f1 >= 1.0 && g[kF1] < 0.0) || (f1 <= kF1Floor && g[kF1] > 0.0)) {
    g[kF1] = 0.0;
  }
  return g;
}

using Matrix2 = std::array<std::array<double, 2>, 2>;

// Hessian of the objective by central differences of the analytic gradient.
// Gauss-Newton alone stalls where dp/dtheta vanishes (theta' near 0 or pi).
Matrix2 hessian(const Problem& problem, double theta_prime, double f1, bool use_on, bool use_off) {
  constexpr double h = 1e-6;
  Matrix2 out{};
  const auto g_plus_t = problem.evaluate(theta_prime + h, f1, use_on, use_off).gradient();
  const auto g_minus_t = problem.evaluate(theta_prime - h, f1, use_on, use_off).gradient();
  const double hi = std::min(f1 + h, 1.0);
  const double lo = std::max(f1 - h, kF1Floor);
  const auto g_plus_f = problem.evaluate(theta_prime, hi, use_on, use_off).gradient();
  const auto g_minus_f = problem.evaluate(theta_prime, lo, use_on, use_off).gradient();
  for (int i = 0; i < 2; ++i) {
    out[i][kTheta] = (g_plus_t[i] - g_minus_t[i]) / (2.0 * h);
    out[i][kF1] = (g_plus_f[i] - g_minus_f[i]) / (hi - lo);
  }
  const double sym = 0.5 * (out[0][1] + out[1][0]);
  out[0][1] = out[1][0] = sym;
  return out;
}

// Decrease predicted by the undamped Newton step on a positive definite
// Hessian. Once this is below the rounding of the objective no step can show
// progress, although the gradient may still sit above its tolerance.
bool at_resolution(const Matrix2& h, const std::array<double, 2>& g, const std::array<bool, 2>& free, double value,
                   double relative) {
  std::array<double, 2> step{0.0, 0.0};
  const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
  if (free[0] && free[1]) {
    if (!(h[0][0] > 0.0 && det > 0.0)) return false;
    step[0] = -(g[0] * h[1][1] - g[1] * h[0][1]) / det;
    step[1] = -(h[0][0] * g[1] - h[1][0] * g[0]) / det;
  } else if (free[0] || free[1]) {
    const int i = free[0] ? 0 : 1;
    if (!(h[i][i] > 0.0)) return false;
    step[i] = -g[i] / h[i][i];
  } else {
    return true;
  }
  const double decrease = -0.5 * (g[0] * step[0] + g[1] * step[1]);
  return decrease <= relative * std::abs(value);
}

Refinement refine(const Problem& problem, double theta_prime, double f1, std::array<bool, 2> active, bool use_on,
                  bool use_off, const RunFitOptions& options) {
  Refinement out;
  out.theta_prime = theta_prime;
  out.f1 = f1;
  Evaluation current = problem.evaluate(theta_prime, f1, use_on, use_off);
  out.history.push_back(current.value);
  double lambda = 1e-3;

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const auto g = projected(current.gradient(), out.f1, active);
    out.gradient_norm = std::hypot(g[0], g[1]);
    if (out.gradient_norm < options.gradient_tolerance) {
      out.converged = true;
      out.value = current.value;
      return out;
    }
    out.iterations = it + 1;

    const std::array<bool, 2> free{active[kTheta], active[kF1] && g[kF1] != 0.0};
    const Matrix2 h = hessian(problem, out.theta_prime, out.f1, use_on, use_off);
    if (at_resolution(h, g, free, current.value, options.value_resolution)) {
      out.converged = true;
      out.value = current.value;
      return out;
    }
    // Damping scale: Gauss-Newton curvature, which is never negative.
    std::array<double, 2> scale{};
    for (int i = 0; i < 2; ++i) scale[i] = 2.0 * current.gn_hessian[i][i] + std::abs(h[i][i]) + 1e-12;

    bool improved = false;
    while (!improved && lambda < 1e30) {
      Matrix2 a = h;
      for (int i = 0; i < 2; ++i) a[i][i] += lambda * scale[i];
      std::array<double, 2> step{0.0, 0.0};
      const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
      if (free[0] && free[1] && a[0][0] > 0.0 && det > 0.0) {
        step[0] = -(g[0] * a[1][1] - g[1] * a[0][1]) / det;
        step[1] = -(a[0][0] * g[1] - a[1][0] * g[0]) / det;
      } else if (free[0] && !free[1] && a[0][0] > 0.0) {
        step[0] = -g[0] / a[0][0];
      } else if (free[1] && !free[0] && a[1][1] > 0.0) {
        step[1] = -g[1] / a[1][1];
      } else {
        lambda = std::max(lambda, 1e-6) * 10.0;  // not yet positive definite
        continue;
      }
      const double next_theta = wrap_phase(out.theta_prime + step[0]);
      const double next_f1 = std::clamp(out.f1 + step[1], kF1Floor, 1.0);
      const Evaluation trial = problem.evaluate(next_theta, next_f1, use_on, use_off);
      if (std::isfinite(trial.value) && trial.value <= current.value &&
          (trial.value < current.value || next_theta != out.theta_prime || next_f1 != out.f1)) {
        out.theta_prime = next_theta;
        out.f1 = next_f1;
        current = trial;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
      } else {
        lambda = std::max(lambda, 1e-6) * 10.0;
      }
    }
    if (!improved) break;  // no representable decrease left
    if (current.value > out.history.back()) throw std::logic_error("refinement increased the residual");
    out.history.push_back(current.value);
  }
  out.value = current.value;
  const auto g = projected(current.gradient(), out.f1, active);
  out.gradient_norm = std::hypot(g[0], g[1]);
  const std::array<bool, 2> free{active[kTheta], active[kF1] && g[kF1] != 0.0};
  out.converged = out.gradient_norm < options.gradient_tolerance ||
                  at_resolution(hessian(problem, out.theta_prime, out.f1, use_on, use_off), g, free, current.value,
                                options.value_resolution);
  return out;
}

struct GridCell {
  std::size_t i;  // theta index
  std::size_t j;  // f1 index
  double value;
};

// Cells no larger than any neighbour; theta wraps, f1 does not.
std::vector<GridCell> local_minima(const std::vector<double>& grid, std::size_t nt, std::size_t nf) {
  std::vector<GridCell> out;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nf; ++j) {
      const double v = grid[i * nf + j];
      bool minimum = true;
      for (int di = -1; di <= 1 && minimum; ++di) {
        for (int dj = -1; dj <= 1 && minimum; ++dj) {
          if (di == 0 && dj == 0) continue;
          const long jj = static_cast<long>(j) + dj;
          if (jj < 0 || jj >= static_cast<long>(nf)) continue;
          const std::size_t ii = (i + nt + static_cast<std::size_t>(di + 1) - 1) % nt;
          if (grid[ii * nf + static_cast<std::size_t>(jj)] < v) minimum = false;
        }
      }
      if (minimum) out.push_back({i, j, v});
    }
  }
  std::sort(out.begin(), out.end(), [](const GridCell& l, const GridCell& r) { return l.value < r.value; });
  return out;
}

Refinement best_of(const Problem& problem, const std::vector<GridCell>& starts, double theta_step,
                   const std::vector<double>& f1_values, std::array<bool, 2> active, bool use_on, bool use_off,
                   double fixed_theta, double fixed_f1, const RunFitOptions& options) {
  Refinement best;
  bool have = false;
  const std::size_t count = std::min(starts.size(), std::max<std::size_t>(options.refine_candidates, 1));
  for (std::size_t c = 0; c < count; ++c) {
    const double theta = active[kTheta] ? static_cast<double>(starts[c].i) * theta_step : fixed_theta;
    const double f1 = active[kF1] ? f1_values[starts[c].j] : fixed_f1;
    Refinement r = refine(problem, theta, f1, active, use_on, use_off, options);
    if (!have || r.value < best.value) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

}  // namespace

ChainProbabilities run_fit_chain(double theta_prime, double f1, const RunFitFixed& fixed) {
  const Probabilities p = probabilities(theta_prime, f1, fixed);
  return {p.p0, p.p1};
}

double run_fit_objective(const RunSeries& on, const RunSeries& off, const RunFitFixed& fixed,
                         std::size_t n_measurements, double theta_prime, double f1) {
  const Problem problem(on, off, fixed, n_measurements);
  return problem.evaluate(theta_prime, f1, true, true).value;
}

FitResult fit_run_lengths(const RunSeries& on, const RunSeries& off, const RunFitFixed& fixed,
                          std::size_t n_measurements, const RunFitOptions& options) {
  if (!(options.theta_step > 0.0 && options.f1_step > 0.0 && options.f1_step <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid steps must be positive");
  }
  const Problem problem(on, off, fixed, n_measurements);

  const auto nt = static_cast<std::size_t>(std::llround(kTwoPi / options.theta_step));
  const double theta_step = kTwoPi / static_cast<double>(nt);
  const auto nf = static_cast<std::size_t>(std::llround(1.0 / options.f1_step));
  std::vector<double> f1_values(nf);
  for (std::size_t j = 0; j < nf; ++j) f1_values[j] = static_cast<double>(j + 1) / static_cast<double>(nf);

  // F_on depends on theta only; p1 is affine in f1, so one evaluation per theta suffices.
  const double w_on = problem.total_weight(true, false);
  const double w_off = problem.total_weight(false, true);
  std::vector<double> on_part(nt, 0.0);
  std::vector<double> off_part(nt * nf, 0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    const Probabilities pr = probabilities(static_cast<double>(i) * theta_step, 1.0, fixed);
    const double leave_off_unit = 1.0 - pr.p1;
    for (const auto& d : problem.points()) {
      if (d.part == Outcome::On) {
        const double r = d.ratio - d.finite * std::pow(pr.p0, static_cast<double>(d.q - 1));
        on_part[i] += d.weight * r * r;
      } else {
        for (std::size_t j = 0; j < nf; ++j) {
          const double p1 = std::clamp(1.0 - f1_values[j] * leave_off_unit, 0.0, 1.0);
          const double r = d.ratio - d.finite * std::pow(p1, static_cast<double>(d.q - 1));
          off_part[i * nf + j] += d.weight * r * r;
        }
      }
    }
  }

  Refinement best;
  if (options.mode == FitMode::Joint) {
    std::vector<double> grid(nt * nf);
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t j = 0; j < nf; ++j) grid[i * nf + j] = (on_part[i] + off_part[i * nf + j]) / (w_on + w_off);
    }
    best = best_of(problem, local_minima(grid, nt, nf), theta_step, f1_values, {true, true}, true, true, 0.0, 1.0,
                   options);
  } else {
    const Refinement stage1 = best_of(problem, local_minima(on_part, nt, 1), theta_step, f1_values, {true, false},
                                      true, false, 0.0, 1.0, options);
    const auto i = static_cast<std::size_t>(std::llround(stage1.theta_prime / theta_step)) % nt;
    std::vector<double> column(nf);
    for (std::size_t j = 0; j < nf; ++j) column[j] = off_part[i * nf + j];
    std::vector<GridCell> starts;
    for (const auto& cell : local_minima(column, 1, nf)) starts.push_back({0, cell.j, cell.value});
    best = best_of(problem, starts, theta_step, f1_values, {false, true}, false, true, stage1.theta_prime, 1.0,
                   options);
    best.iterations += stage1.iterations;
    best.converged = best.converged && stage1.converged;
  }

  if (!best.converged) {
    std::ostringstream msg;
    msg << "refinement stopped after " << best.iterations << " iterations with gradient norm " << best.gradient_norm;
    throw Error(ErrorKind::NonConvergence, msg.str());
  }

  const ChainProbabilities chain = run_fit_chain(best.theta_prime, best.f1, fixed);
  FitResult result;
  result.parameters["theta_prime"] = best.theta_prime;
  result.parameters["theta_prime_mirror"] = wrap_phase(kTwoPi - best.theta_prime);
  result.parameters["theta"] = kTwoPi * static_cast<double>(fixed.n_cycles) + best.theta_prime;
  result.parameters["f1"] = best.f1;
  result.parameters["p0"] = chain.p0;
  result.parameters["p1"] = chain.p1;
  result.residual = problem.evaluate(best.theta_prime, best.f1, true, true).value;
  result.iterations = best.iterations;
  result.converged = best.converged;
  result.gradient_norm = best.gradient_norm;
  result.residual_history = std::move(best.history);
  return result;
}

}  // namespace zeno
