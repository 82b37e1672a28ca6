#pragma once

#include <cstdint>
#include <random>

namespace gaitmirror {

/// Seed derivation used throughout the experiment runner. The mix is part of
/// the output contract: given the same master seed, any implementation of
/// this function reproduces the per-trial seed stream.
///
///   seed(master, index) = finalize(master + (index + 1) * 0x9E3779B97F4A7C15)
///
/// where finalize is the splitmix64 output function
///
///   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
///   z ^= z >> 27; z *= 0x94D049BB133111EB;
///   z ^= z >> 31;
///
/// All arithmetic is modulo 2^64. This equals the (index+1)-th output of a
/// splitmix64 generator whose state starts at `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Substream indices within one trial. Each consumer owns an independent
/// generator seeded with derive_seed(trial_seed, index).
enum class SeedStream : std::uint64_t {
  InitialImpedance = 0,
  PlantNoise = 1,
  ExplorationStf = 2,
  ExplorationSte = 3,
  ExplorationSwf = 4,
  ExplorationSwe = 5,
  RandomGains = 6,
  IntactNoise = 7,
};

inline std::mt19937_64 make_generator(std::uint64_t trial_seed, SeedStream stream) {
  return std::mt19937_64(derive_seed(trial_seed, static_cast<std::uint64_t>(stream)));
}

}  // namespace gaitmirror
