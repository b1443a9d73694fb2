#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace reuse_lab::rng {

/// Sub-stream identifiers. Each random quantity of a run draws from its own
/// stream so that, e.g., changing the noise level leaves the data untouched.
enum class Stream : std::uint64_t {
  GroundTruth = 0x67742d7733ULL,
  Data = 0x64617461ULL,
  Noise = 0x6e6f697365ULL,
  Permutation = 0x7065726dULL,
  Replica = 0x7265706cULL,
};

using Engine = boost::random::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for counter `index` of `stream` under `seed`. Pure function of its inputs.
constexpr std::uint64_t derive(std::uint64_t seed, Stream stream, std::uint64_t index = 0) noexcept {
  return mix(mix(mix(seed) ^ static_cast<std::uint64_t>(stream)) + index);
}

inline Engine engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return Engine(derive(seed, stream, index));
}

}  // namespace reuse_lab::rng
