#pragma once

// INI-style experiment configuration:
//
//   [drive]       omega_rad_per_s | omega_hz, detuning_rad_per_s | detuning_hz, tau_s
//   [relax]       big_gamma_per_s, gamma_ph_per_s
//   [degeneracy]  f0, f1
//   [probe]       tau_p_s
//   [run]         n_measurements, seed, model (zeno|coherent)
//
// Missing keys keep their defaults. *_hz keys are converted to rad/s on read.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zeno/trajectory.hpp"

namespace zeno {

struct RunConfig {
  ExperimentConfig experiment{};
  std::uint64_t seed = 42;
  Model model = Model::Zeno;
};

// 2 ms drive pulses, 10 ms probes, 500 measurements, f0 = 1/2, f1 = 1,
// a + b = 0.395 (Gamma = 263/s, gamma_ph = 0.5/s) and a nutation angle of
// 640 full cycles plus (1 + 1e-4) pi.
RunConfig reference_defaults();

// Errors are ErrorKind::InvalidArgument with the offending key in the message.
RunConfig parse_config(std::string_view text, RunConfig base = reference_defaults());
RunConfig load_config(const std::filesystem::path& path);

// "section.key=value"
void apply_override(RunConfig& config, std::string_view assignment);

// Canonical (key, value) list in file order; doubles printed round-trippable.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);
std::string to_ini(const RunConfig& config);

// FNV-1a over the physics keys (drive, relax, degeneracy) in canonical form,
// as 16 hex digits. Record-keeping keys (probe, run) do not enter.
std::string config_hash(const RunConfig& config);

}  // namespace zeno
