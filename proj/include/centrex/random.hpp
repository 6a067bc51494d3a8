#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace centrex {

using RandomEngine = std::mt19937_64;

/// Seed-splitting scheme. Every random stream in the library is obtained by
/// hashing a parent seed together with a list of integer tags (trial index,
/// sensor id, purpose code, ...). The hash is SplitMix64 applied to a running
/// state, so streams with different tag paths are decorrelated and the
/// result does not depend on evaluation order or on the number of threads.
namespace seed {

inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t state = mix(parent);
  for (std::uint64_t tag : tags) {
    state = mix(state ^ mix(tag + 0x632be59bd9b4e019ULL));
  }
  return state;
}

/// Purpose codes used as the first tag of a derivation.
enum Purpose : std::uint64_t {
  kClusterCount = 1,
  kCentroids = 2,
  kSensing = 3,
  kLabels = 4,
  kNoise = 5,
  kShard = 6,
  kAlgorithm = 7,
  kPeers = 8,
  kMonteCarlo = 9,
  kTrial = 10,
  kBaseline = 11,
};

}  // namespace seed

inline RandomEngine make_engine(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
  return RandomEngine(seed::derive(parent, tags));
}

}  // namespace centrex
