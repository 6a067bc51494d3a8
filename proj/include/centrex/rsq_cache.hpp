#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "centrex/mathcore.hpp"

namespace centrex {

/// Name of the environment variable pointing at the on-disk r^2 cache.
inline constexpr const char* kCacheDirEnv = "CENTREX_CACHE_DIR";

/// r^2 lookup shared by all algorithms in a process.
///
/// Values are memoized in memory keyed by (m, mu2, samples, seed). When
/// CENTREX_CACHE_DIR is set, entries are also read from and written to
/// `<dir>/rsq_m<m>_mu<mu2>_n<samples>_s<seed>.txt`. Thread-safe.
RSquared cached_r_squared(int m, double mu2, std::uint64_t samples = kDefaultRSquaredSamples,
                          std::uint64_t seed = kDefaultRSquaredSeed);

std::optional<std::filesystem::path> cache_dir_from_env();

/// Writes one cache entry into `dir` (created if missing).
void store_r_squared(const std::filesystem::path& dir, const RSquared& r);

/// Reads a cache entry; empty when absent or unreadable.
std::optional<RSquared> load_r_squared(const std::filesystem::path& dir, int m, double mu2,
                                       std::uint64_t samples, std::uint64_t seed);

}  // namespace centrex
