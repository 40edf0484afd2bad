#pragma once

#include <cstdint>
#include <string_view>

namespace zeno {

// Probe readout. On: resonance scattering seen, ion in the ground state.
// Off: no scattering, ion shelved in the metastable level.
enum class Outcome : std::uint8_t { On = 0, Off = 1 };

constexpr Outcome flipped(Outcome o) noexcept { return o == Outcome::On ? Outcome::Off : Outcome::On; }

constexpr std::string_view to_token(Outcome o) noexcept { return o == Outcome::On ? "on" : "off"; }

}  // namespace zeno
