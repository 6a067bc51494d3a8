#include "centrex/rsq_cache.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "centrex/errors.hpp"

namespace centrex {

namespace {

using Key = std::tuple<int, double, std::uint64_t, std::uint64_t>;

std::mutex& memo_mutex() {
  static std::mutex mu;
  return mu;
}

std::map<Key, RSquared>& memo() {
  static std::map<Key, RSquared> table;
  return table;
}

std::filesystem::path entry_path(const std::filesystem::path& dir, int m, double mu2,
                                 std::uint64_t samples, std::uint64_t seed) {
  char name[160];
  std::snprintf(name, sizeof name, "rsq_m%d_mu%g_n%llu_s%llu.txt", m, mu2,
                static_cast<unsigned long long>(samples), static_cast<unsigned long long>(seed));
  return dir / name;
}

}  // namespace

std::optional<std::filesystem::path> cache_dir_from_env() {
  const char* dir = std::getenv(kCacheDirEnv);
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::filesystem::path(dir);
}

void store_r_squared(const std::filesystem::path& dir, const RSquared& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create cache directory " + dir.string() + ": " + ec.message());
  const auto path = entry_path(dir, r.m, r.mu2, r.mc_samples, r.mc_seed);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char line[128];
  std::snprintf(line, sizeof line, "%.17g %.17g\n", r.value, r.std_error);
  out << line;
}

std::optional<RSquared> load_r_squared(const std::filesystem::path& dir, int m, double mu2,
                                       std::uint64_t samples, std::uint64_t seed) {
  std::ifstream in(entry_path(dir, m, mu2, samples, seed));
  if (!in) return std::nullopt;
  RSquared r;
  if (!(in >> r.value >> r.std_error) || !(r.value > 0.0)) return std::nullopt;
  r.m = m;
  r.mu2 = mu2;
  r.mc_samples = samples;
  r.mc_seed = seed;
  return r;
}

RSquared cached_r_squared(int m, double mu2, std::uint64_t samples, std::uint64_t seed) {
  const Key key{m, mu2, samples, seed};
  std::lock_guard<std::mutex> lock(memo_mutex());
  if (auto it = memo().find(key); it != memo().end()) return it->second;

  const auto dir = cache_dir_from_env();
  std::optional<RSquared> r;
  if (dir) r = load_r_squared(*dir, m, mu2, samples, seed);
  if (!r) {
    const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    r = compute_r_squared(m, mu2, samples, seed, threads);
    if (dir) store_r_squared(*dir, *r);
  }
  memo().emplace(key, *r);
  return *r;
}

}  // namespace centrex
