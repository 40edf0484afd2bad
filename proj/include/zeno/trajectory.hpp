#pragma once

// Synthetic probe records: alternating drive pulses and projective probes,
// generated either with state reduction at every probe (Zeno) or with the
// nutation continuing uninterrupted across probes (Coherent).

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "zeno/bloch.hpp"
#include "zeno/outcome.hpp"

namespace zeno {

enum class Model : std::uint8_t { Zeno, Coherent };

std::string_view to_token(Model m) noexcept;
Model parse_model(std::string_view token);

struct Trajectory {
  std::uint64_t seed = 0;
  Model model = Model::Zeno;
  std::vector<Outcome> outcomes;

  std::size_t size() const noexcept { return outcomes.size(); }
  bool operator==(const Trajectory&) const = default;
};

struct ExperimentConfig {
  DriveParams drive{};
  RelaxationParams relax{};
  DegeneracyFactors degeneracy{};
  double probe_duration = 0.010;  // s, carried for the record only
  std::size_t n_measurements = 500;
};

void validate(const ExperimentConfig& config);

// Per-pulse probabilities of repeating the previous result.
struct ChainProbabilities {
  double p0 = 1.0;  // On followed by On
  double p1 = 1.0;  // Off followed by Off

  // Long-run fraction of On results, (1 - p1) / ((1 - p0) + (1 - p1)); 1 if both levels are absorbing.
  double stationary_on() const noexcept;
};

ChainProbabilities chain_probabilities(const ExperimentConfig& config);

// One step of the two-state chain driven by a uniform draw in [0, 1).
constexpr Outcome zeno_step(Outcome current, double p0, double p1, double draw) noexcept {
  const double stay = current == Outcome::On ? p0 : p1;
  return draw < stay ? current : flipped(current);
}

// First result from the stationary distribution, then one chain step per
// pulse. Draw k of the record uses uniform01(seed, k).
Trajectory simulate_zeno(const ChainProbabilities& chain, std::size_t n, std::uint64_t seed);
Trajectory simulate_zeno(const ExperimentConfig& config, std::uint64_t seed);

// Starts On. A run of current length q continues with the conditional
// probability implied by CoherentRunLaw, and every new run restarts the phase.
Trajectory simulate_coherent(double omega_tau, std::size_t n, std::uint64_t seed);
// Throws CoherentModeRequiresNoRelaxation unless both relaxation rates are 0.
Trajectory simulate_coherent(const ExperimentConfig& config, std::uint64_t seed);

Trajectory simulate(Model model, const ExperimentConfig& config, std::uint64_t seed);

}  // namespace zeno
