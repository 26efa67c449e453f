#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spheretile {

/// Deterministic 64-bit mix-based RNG (splitmix64). Used everywhere a seed
/// appears in a public interface so results are reproducible across platforms,
/// unlike std::mt19937 distributions whose mapping is implementation-defined
/// for some distribution types.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

/// Shortest decimal representation of a double that round-trips exactly
/// (via std::to_chars). Used by the JSON writer's provenance hash and the
/// plain-text reports so serialized numbers are bit-stable.
std::string double_to_shortest(double value);

/// FNV-1a 64-bit hash of a byte string; stable across platforms.
std::uint64_t fnv1a64(const std::string& bytes);

/// Lowercase hex rendering of a 64-bit value, zero-padded to 16 chars.
std::string hex64(std::uint64_t value);

/// Number of worker threads: the SPHERETILE_THREADS environment variable if
/// set to a positive integer, else std::thread::hardware_concurrency().
int thread_count();

/// Runs fn(i) for i in [0, n), splitting the range over thread_count()
/// threads. Falls back to a serial loop when n is small or one thread is
/// requested. fn must be safe to call concurrently for distinct i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace spheretile
