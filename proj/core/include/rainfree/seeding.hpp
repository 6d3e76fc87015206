#pragma once

#include <cstdint>

namespace rainfree {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

// Deterministic, well-separated seed for (base, stream, index). Lets workers derive the
// randomness for step k without sharing generator state.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(base) ^ (stream * 0xD1B54A32D192ED03ULL)) ^ index);
}

}  // namespace rainfree
