#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace zominimax {

/// Tags used as the second path component when splitting per-iteration
/// streams, so that x and y blocks never share randomness.
enum class Role : std::uint64_t {
  kXDirection = 1,
  kXSample = 2,
  kYDirection = 3,
  kYSample = 4,
  kNoise = 5,
  kInit = 6,
  kDiagnostics = 7,
  kMultiStart = 8,
};

inline constexpr std::uint64_t tag(Role role) { return static_cast<std::uint64_t>(role); }

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Seeded random stream addressed by (seed, path). Two streams with the same
/// seed and path produce the same draws; split() derives child streams whose
/// engine seed is a hash of the extended path.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : RngStream(seed, {}) {}

  RngStream(std::uint64_t seed, std::vector<std::uint64_t> path)
      : seed_(seed), path_(std::move(path)), engine_(derive_key(seed_, path_)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<std::uint64_t>& path() const noexcept { return path_; }

  RngStream split(std::initializer_list<std::uint64_t> suffix) const {
    std::vector<std::uint64_t> child = path_;
    child.insert(child.end(), suffix.begin(), suffix.end());
    return RngStream(seed_, std::move(child));
  }

  RngStream split(std::uint64_t index) const { return split({index}); }

  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> dist(mean, stddev);
    return dist(engine_);
  }

  double uniform(double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(engine_);
  }

  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  static std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path) {
    std::uint64_t key = detail::splitmix64(seed);
    for (std::uint64_t p : path) key = detail::splitmix64(key ^ detail::splitmix64(p + 0x632be59bd9b4e019ULL));
    return key;
  }

  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::mt19937_64 engine_;
};

}  // namespace zominimax
