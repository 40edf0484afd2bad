#pragma once

#include <cstdint>
#include <string_view>

namespace zeno {

// Counter-based generator: the draw for measurement k of a record depends only
// on (seed, k), so records are reproducible and any slice can be regenerated
// independently. Two rounds of the SplitMix64 finalizer over the keyed counter.
inline constexpr std::string_view kGeneratorName = "splitmix64-counter/v1";

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t index) noexcept {
  const std::uint64_t key = splitmix64_mix(seed ^ 0x6A09E667F3BCC909ULL);
  return splitmix64_mix(key + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

// Uniform on [0, 1) with 53 random bits.
constexpr double uniform01(std::uint64_t seed, std::uint64_t index) noexcept {
  return static_cast<double>(counter_hash(seed, index) >> 11) * 0x1.0p-53;
}

}  // namespace zeno
