#include "zeno/trajectory.hpp"

#include <string>

#include "zeno/error.hpp"
#include "zeno/rng.hpp"
#include "zeno/run_law.hpp"

namespace zeno {

std::string_view to_token(Model m) noexcept { return m == Model::Zeno ? "zeno" : "coherent"; }

Model parse_model(std::string_view token) {
  if (token == "zeno") return Model::Zeno;
  if (token == "coherent") return Model::Coherent;
  throw Error(ErrorKind::InvalidArgument, "unknown model '" + std::string(token) + "' (expected zeno|coherent)");
}

void validate(const ExperimentConfig& config) {
  validate(config.drive);
  validate(config.relax);
  validate(config.degeneracy);
  if (!(config.probe_duration >= 0.0)) throw Error(ErrorKind::InvalidArgument, "probe duration must be >= 0");
  if (config.n_measurements < 1) throw Error(ErrorKind::InvalidArgument, "need at least one measurement");
}

double ChainProbabilities::stationary_on() const noexcept {
  const double leave_on = 1.0 - p0;
  const double leave_off = 1.0 - p1;
  if (leave_on + leave_off <= 0.0) return 1.0;
  return leave_off / (leave_on + leave_off);
}

ChainProbabilities chain_probabilities(const ExperimentConfig& config) {
  validate(config);
  const DerivedBlochParams derived = derive_bloch_params(config.drive, config.relax);
  return {survival_probability(Outcome::On, derived, config.degeneracy),
          survival_probability(Outcome::Off, derived, config.degeneracy)};
}

Trajectory simulate_zeno(const ChainProbabilities& chain, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one measurement");
  if (!(chain.p0 >= 0.0 && chain.p0 <= 1.0 && chain.p1 >= 0.0 && chain.p1 <= 1.0)) {
    throw Error(ErrorKind::InvalidProbability, "chain probabilities must lie in [0, 1]");
  }
  Trajectory t{seed, Model::Zeno, {}};
  t.outcomes.reserve(n);
  Outcome current = uniform01(seed, 0) < chain.stationary_on() ? Outcome::On : Outcome::Off;
  t.outcomes.push_back(current);
  for (std::size_t k = 1; k < n; ++k) {
    current = zeno_step(current, chain.p0, chain.p1, uniform01(seed, k));
    t.outcomes.push_back(current);
  }
  return t;
}

Trajectory simulate_zeno(const ExperimentConfig& config, std::uint64_t seed) {
  return simulate_zeno(chain_probabilities(config), config.n_measurements, seed);
}

Trajectory simulate_coherent(double omega_tau, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "need at least one measurement");
  const CoherentRunLaw law(omega_tau);
  const std::vector<double> keep = law.continue_probabilities(n);

  Trajectory t{seed, Model::Coherent, {}};
  t.outcomes.reserve(n);
  Outcome current = Outcome::On;
  std::size_t run = 1;
  t.outcomes.push_back(current);
  for (std::size_t k = 1; k < n; ++k) {
    if (uniform01(seed, k) < keep[run - 1]) {
      ++run;
    } else {
      current = flipped(current);
      run = 1;
    }
    t.outcomes.push_back(current);
  }
  return t;
}

Trajectory simulate_coherent(const ExperimentConfig& config, std::uint64_t seed) {
  validate(config);
  if (!config.relax.is_zero()) {
    throw Error(ErrorKind::CoherentModeRequiresNoRelaxation,
                "the uninterrupted-nutation model is defined without relaxation; set both rates to 0");
  }
  if (config.drive.delta != 0.0) {
    throw Error(ErrorKind::NonResonant, "the uninterrupted-nutation model is defined on resonance only");
  }
  return simulate_coherent(config.drive.omega_tau(), config.n_measurements, seed);
}

Trajectory simulate(Model model, const ExperimentConfig& config, std::uint64_t seed) {
  return model == Model::Zeno ? simulate_zeno(config, seed) : simulate_coherent(config, seed);
}

}  // namespace zeno
