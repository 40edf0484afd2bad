#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "zeno/bloch.hpp"
#include "zeno/config.hpp"
#include "zeno/error.hpp"
#include "zeno/fitting.hpp"
#include "zeno/ode_oracle.hpp"
#include "zeno/run_stats.hpp"
#include "zeno/spectrum.hpp"
#include "zeno/trajectory.hpp"
#include "zeno/trajectory_io.hpp"

namespace zeno::cli {

namespace {

using Json = nlohmann::ordered_json;

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "INI configuration (defaults to the built-in reference settings)");
    cmd->add_option("--set", overrides, "override as section.key=value")->take_all();
  }

  RunConfig resolve() const {
    RunConfig config = path.empty() ? reference_defaults() : load_config(path);
    for (const auto& o : overrides) apply_override(config, o);
    return config;
  }
};

Json json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "+inf" : "-inf";
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void emit(const std::string& out_path, const std::string& text, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << text;
  } else {
    write_text_file_atomic(out_path, text);
  }
}

unsigned thread_count() {
  if (const char* env = std::getenv("ZENO_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Json counts_json(const std::map<std::size_t, std::size_t>& counts) {
  Json j = Json::object();
  for (const auto& [q, c] : counts) j[std::to_string(q)] = c;
  return j;
}

Json ratios_json(const RunLengthHistogram& hist, Outcome o) {
  if (hist.count(o, 1) == 0) return nullptr;
  Json j = Json::object();
  for (const auto& [q, r] : normalized_ratios(hist, o)) j[std::to_string(q)] = r;
  return j;
}

Json curve_json(const ModelCurve& curve) {
  Json j = Json::array();
  for (double v : curve.values) j.push_back(v);
  return j;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  ConfigArgs config;
  std::optional<std::string> model;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  RunConfig config = a.config.resolve();
  if (a.model) config.model = parse_model(*a.model);
  if (a.seed) config.seed = *a.seed;
  if (a.n) {
    if (*a.n < 1) throw Error(ErrorKind::InvalidArgument, "--n must be >= 1");
    config.experiment.n_measurements = *a.n;
  }
  const Trajectory t = simulate(config.model, config.experiment, config.seed);
  emit(a.out, serialize(make_trajectory_file(t, config)), out);
  return kOk;
}

// ---- analyze --------------------------------------------------------------

struct AnalyzeArgs {
  std::string trajectory;
  std::string out;
  bool compare = false;
  ConfigArgs config;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const TrajectoryFile file = parse_trajectory_file(read_text_file(a.trajectory));
  const Trajectory& t = file.trajectory;
  const RunLengthHistogram hist = run_length_histogram(t);

  Json doc;
  doc["format"] = "zeno-stats v1";
  doc["n"] = t.size();
  try {
    const P01Estimate est = estimate_p01(t);
    doc["p01"] = {{"estimate", est.value},
                  {"std_error", est.std_error},
                  {"transitions", est.transitions},
                  {"on_events", est.on_events}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoOnEvents) throw;
    doc["p01"] = nullptr;
  }
  doc["runs"] = {{"on", counts_json(hist.counts_on)}, {"off", counts_json(hist.counts_off)}};
  doc["ratios"] = {{"on", ratios_json(hist, Outcome::On)}, {"off", ratios_json(hist, Outcome::Off)}};

  if (a.compare) {
    std::optional<RunConfig> config;
    if (!a.config.path.empty() || !a.config.overrides.empty()) {
      config = a.config.resolve();
    } else {
      config = header_config(file);
    }
    if (!config) throw Error(ErrorKind::InvalidArgument, "--compare needs a config (header or --config)");
    const ChainProbabilities chain = chain_probabilities(config->experiment);
    const double omega_tau = config->experiment.drive.omega_tau();
    const std::size_t q_max = std::max<std::size_t>(hist.max_run(), 1);
    doc["models"] = {
        {"p0", chain.p0},
        {"p1", chain.p1},
        {"omega_tau", omega_tau},
        {"q_max", q_max},
        {"zeno_on", curve_json(model_curve(Model::Zeno, chain.p0, t.size(), q_max))},
        {"zeno_off", curve_json(model_curve(Model::Zeno, chain.p1, t.size(), q_max))},
        {"coherent", curve_json(model_curve(Model::Coherent, omega_tau, t.size(), q_max))},
    };
    const Discrimination d = discriminate_record(hist, chain, omega_tau);
    doc["discrimination"] = {
        {"runs", d.runs},
        {"log_likelihood_zeno", json_number(d.log_likelihood_zeno)},
        {"log_likelihood_coherent", json_number(d.log_likelihood_coherent)},
        {"log_likelihood_ratio", json_number(d.log_likelihood_ratio())},
        {"verdict", std::string(to_token(d.verdict()))},
    };
  }
  emit(a.out, doc.dump(2) + "\n", out);
  return kOk;
}

// ---- spectrum -------------------------------------------------------------

struct SpectrumArgs {
  ConfigArgs config;
  std::optional<double> start;
  double step = 0.0;
  std::size_t count = 0;
  std::string axis = "detuning";
  bool hz = false;
  bool mc = false;
  std::optional<std::size_t> mc_n;
  std::string out;
};

int cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
  const RunConfig config = a.config.resolve();
  const ScanAxis axis = a.axis == "tau" ? ScanAxis::PulseLength : ScanAxis::Detuning;
  const double scale = (axis == ScanAxis::Detuning && a.hz) ? 2.0 * std::numbers::pi : 1.0;
  if (a.step == 0.0) throw Error(ErrorKind::InvalidArgument, "--step must be nonzero");

  DriveParams base = config.experiment.drive;
  if (a.start) (axis == ScanAxis::Detuning ? base.delta : base.tau) = *a.start * scale;

  std::optional<MonteCarloRequest> mc;
  if (a.mc) mc = MonteCarloRequest{a.mc_n.value_or(config.experiment.n_measurements), config.seed};

  const auto points = scan_detuning(base, a.step * scale, a.count, mc, axis, thread_count());
  std::ostringstream csv;
  csv << (axis == ScanAxis::Detuning ? "detuning_rad_per_s" : "tau_s") << ",p01_model,p01_mc,stderr\n";
  for (const auto& p : points) {
    csv << format_double(p.axis_value) << ',' << format_double(p.p01_model) << ','
        << (p.p01_mc ? format_double(*p.p01_mc) : "") << ',' << (p.std_error ? format_double(*p.std_error) : "")
        << '\n';
  }
  emit(a.out, csv.str(), out);
  return kOk;
}

// ---- fit ------------------------------------------------------------------

struct ContrastArgs {
  double p_max = 0.0;
  double p_min = 0.0;
  double f0 = 0.5;
  std::string out;
};

int cmd_fit_contrast(const ContrastArgs& a, std::ostream& out) {
  const ContrastFit fit = fit_contrast(a.p_max, a.p_min, a.f0);
  Json doc;
  doc["format"] = "zeno-fit v1";
  doc["kind"] = "contrast";
  doc["inputs"] = {{"p_max", a.p_max}, {"p_min", a.p_min}, {"f0", a.f0}};
  doc["parameters"] = {{"b0", fit.b0}, {"a_plus_b", fit.a_plus_b}};
  emit(a.out, doc.dump(2) + "\n", out);
  return kOk;
}

struct RunsArgs {
  std::string input;
  RunFitFixed fixed;
  bool two_stage = false;
  std::string weights = "inverse-variance";
  std::string out;
};

RunLengthHistogram histogram_from_stats(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
    RunLengthHistogram hist;
    hist.n_measurements = doc.at("n").get<std::size_t>();
    for (const auto& [name, target] : {std::pair{"on", &hist.counts_on}, std::pair{"off", &hist.counts_off}}) {
      for (const auto& [q, c] : doc.at("runs").at(name).items()) {
        (*target)[std::stoul(q)] = c.get<std::size_t>();
      }
    }
    if (hist.covered() != hist.n_measurements) {
      throw Error(ErrorKind::InvalidArgument, "stats file: run counts do not cover n");
    }
    return hist;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("stats file: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("stats file: ") + e.what());
  }
}

int cmd_fit_runs(const RunsArgs& a, std::ostream& out) {
  const std::string text = read_text_file(a.input);
  const RunLengthHistogram hist = a.input.ends_with(".json")
                                      ? histogram_from_stats(text)
                                      : run_length_histogram(parse_trajectory_file(text).trajectory);
  RunFitOptions options;
  options.mode = a.two_stage ? FitMode::TwoStage : FitMode::Joint;
  const RunWeighting weighting = a.weights == "counts" ? RunWeighting::RunCount : RunWeighting::InverseVariance;
  const FitResult fit = fit_run_lengths(run_series(hist, Outcome::On, weighting),
                                        run_series(hist, Outcome::Off, weighting), a.fixed, hist.n_measurements, options);
  Json doc;
  doc["format"] = "zeno-fit v1";
  doc["kind"] = "runs";
  doc["inputs"] = {{"source", a.input},
                   {"n", hist.n_measurements},
                   {"mode", a.two_stage ? "two-stage" : "joint"},
                   {"weights", a.weights},
                   {"a_plus_b", a.fixed.a_plus_b},
                   {"b0", a.fixed.b0},
                   {"f0", a.fixed.f0},
                   {"n_cycles", a.fixed.n_cycles},
                   {"a_minus_b", a.fixed.a_minus_b}};
  Json params = Json::object();
  for (const auto& [k, v] : fit.parameters) params[k] = v;
  doc["parameters"] = params;
  doc["residual"] = fit.residual;
  doc["iterations"] = fit.iterations;
  doc["converged"] = fit.converged;
  emit(a.out, doc.dump(2) + "\n", out);
  return kOk;
}

// ---- validate -------------------------------------------------------------

struct Check {
  std::string name;
  double max_dev = 0.0;
  double tolerance = 0.0;
  bool pass() const { return max_dev <= tolerance; }
};

double oracle_gap(const DerivedBlochParams& derived, const BlochRates& rates, double tau, Outcome start) {
  const DegeneracyFactors unit{1.0, 1.0};
  const double analytic = survival_formula(start, derived, unit);
  const double numeric = 1.0 - ode_transition_probability(start, rates, tau);
  return std::abs(analytic - numeric);
}

int cmd_validate(const ConfigArgs& a, std::ostream& out) {
  const RunConfig config = a.resolve();
  const ExperimentConfig& e = config.experiment;
  validate(e);
  const DerivedBlochParams derived = derive_bloch_params(e.drive, e.relax);
  // Range check of the configured probabilities; throws on misuse.
  chain_probabilities(e);

  std::vector<Check> checks;
  const BlochRates rates = BlochRates::from(e.drive, e.relax);
  checks.push_back({"oracle_on", oracle_gap(derived, rates, e.drive.tau, Outcome::On), 1e-6});
  checks.push_back({"oracle_off", oracle_gap(derived, rates, e.drive.tau, Outcome::Off), 1e-6});

  {
    DriveParams resonant = e.drive;
    const DerivedBlochParams lossless = derive_bloch_params(resonant, RelaxationParams{});
    const double reduced = 1.0 - survival_formula(Outcome::On, lossless, {1.0, 1.0});
    checks.push_back({"reduction", std::abs(reduced - excitation_probability_coherent(resonant)), 1e-12});
  }

  Check grid{"oracle_grid", 0.0, 1e-6};
  for (double omega_tau : {2.0, 5.0, 10.0, 50.0, 200.0}) {
    for (int ia = 0; ia <= 10; ++ia) {
      for (int ib = 0; ib <= 10; ++ib) {
        const double aa = 0.1 * ia;
        const double bb = 0.1 * ib;
        if (omega_tau * omega_tau <= (aa - bb) * (aa - bb)) continue;
        const DerivedBlochParams d = derive_bloch_params(omega_tau, aa, bb);
        const BlochRates r{omega_tau, 0.0, 2.0 * aa, 2.0 * bb};
        for (Outcome s : {Outcome::On, Outcome::Off}) grid.max_dev = std::max(grid.max_dev, oracle_gap(d, r, 1.0, s));
      }
    }
  }
  checks.push_back(grid);

  bool ok = true;
  for (const auto& c : checks) {
    char line[160];
    std::snprintf(line, sizeof line, "%-12s max_dev=%.3e tol=%.0e %s\n", c.name.c_str(), c.max_dev, c.tolerance,
                  c.pass() ? "PASS" : "FAIL");
    out << line;
    ok = ok && c.pass();
  }
  return ok ? kOk : kValidationFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-ion quantum Zeno simulator and run-statistics toolkit", "zeno"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "generate a probe record");
  sim.config.attach(simulate_cmd);
  simulate_cmd->add_option("--model", sim.model, "zeno|coherent (overrides run.model)");
  simulate_cmd->add_option("--seed", sim.seed, "overrides run.seed");
  simulate_cmd->add_option("--n", sim.n, "overrides run.n_measurements");
  simulate_cmd->add_option("--out", sim.out, "output path (stdout if omitted)");

  AnalyzeArgs ana;
  auto* analyze_cmd = app.add_subcommand("analyze", "run-length statistics of a record");
  analyze_cmd->add_option("trajectory", ana.trajectory, "trajectory file")->required();
  analyze_cmd->add_option("--out", ana.out, "output path (stdout if omitted)");
  analyze_cmd->add_flag("--compare", ana.compare, "add model curves and the Zeno/coherent verdict");
  ana.config.attach(analyze_cmd);

  SpectrumArgs spec;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "stroboscopic excitation spectrum as CSV");
  spec.config.attach(spectrum_cmd);
  spectrum_cmd->add_option("--start", spec.start, "first axis value (default: configured detuning or tau)");
  spectrum_cmd->add_option("--step", spec.step, "axis step")->required();
  spectrum_cmd->add_option("--count", spec.count, "number of points")->required()->check(CLI::PositiveNumber);
  spectrum_cmd->add_option("--axis", spec.axis, "detuning|tau")->check(CLI::IsMember({"detuning", "tau"}));
  spectrum_cmd->add_flag("--hz", spec.hz, "detuning start/step given in Hz");
  spectrum_cmd->add_flag("--mc", spec.mc, "add Monte Carlo estimates");
  spectrum_cmd->add_option("--mc-n", spec.mc_n, "measurements per Monte Carlo point");
  spectrum_cmd->add_option("--out", spec.out, "output path (stdout if omitted)");

  auto* fit_cmd = app.add_subcommand("fit", "parameter fits");
  fit_cmd->require_subcommand(1);
  ContrastArgs con;
  auto* contrast_cmd = fit_cmd->add_subcommand("contrast", "B0 and a+b from the resonance contrast");
  contrast_cmd->add_option("--p-max", con.p_max)->required();
  contrast_cmd->add_option("--p-min", con.p_min)->required();
  contrast_cmd->add_option("--f0", con.f0);
  contrast_cmd->add_option("--out", con.out, "output path (stdout if omitted)");
  RunsArgs runs;
  auto* runs_cmd = fit_cmd->add_subcommand("runs", "theta' and f1 from run-length statistics");
  runs_cmd->add_option("--input", runs.input, "trajectory file or stats .json")->required();
  runs_cmd->add_option("--a-plus-b", runs.fixed.a_plus_b, "fixed damping a + b")->capture_default_str();
  runs_cmd->add_option("--b0", runs.fixed.b0, "fixed steady-state excitation")->capture_default_str();
  runs_cmd->add_option("--f0", runs.fixed.f0, "fixed ground-state degeneracy factor")->capture_default_str();
  runs_cmd->add_option("--n-cycles", runs.fixed.n_cycles, "whole nutation cycles in theta")->capture_default_str();
  runs_cmd->add_option("--a-minus-b", runs.fixed.a_minus_b, "a - b, enters only the Off phase offset")->capture_default_str();
  runs_cmd->add_flag("--two-stage", runs.two_stage, "fit theta' on On runs, then f1 on Off runs");
  runs_cmd->add_option("--weights", runs.weights, "inverse-variance|counts")
      ->check(CLI::IsMember({"inverse-variance", "counts"}));
  runs_cmd->add_option("--out", runs.out, "output path (stdout if omitted)");

  ConfigArgs val;
  auto* validate_cmd = app.add_subcommand("validate", "closed forms against the ODE oracle");
  val.attach(validate_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim, out);
    if (*analyze_cmd) return cmd_analyze(ana, out);
    if (*spectrum_cmd) return cmd_spectrum(spec, out);
    if (*contrast_cmd) return cmd_fit_contrast(con, out);
    if (*runs_cmd) return cmd_fit_runs(runs, out);
    if (*validate_cmd) return cmd_validate(val, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.kind()) ? kInputError : kDomainError;
  }
  return kInputError;
}

}  // namespace zeno::cli
