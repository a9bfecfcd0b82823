#pragma once

#include <cstdint>

namespace cfmob {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Independent substream seed for (base seed, stream tag, index). Used so each
// Monte Carlo run draws from its own generator regardless of execution order.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
    return mix64(mix64(mix64(base) ^ stream) ^ index);
}

namespace stream {
inline constexpr std::uint64_t deployment = 0xD3;
inline constexpr std::uint64_t trajectory = 0x7A;
inline constexpr std::uint64_t users = 0x0E;
}  // namespace stream

}  // namespace cfmob
