#pragma once

#include <cstdint>
#include <string_view>

namespace bwe {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent seed for a named substream ("init", "negatives").
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(seed ^ mix64(h));
}

// Counter-based generator: the stream for (seed, key) is a pure function of
// its arguments, so per-item streams can be drawn in any order or in parallel
// and still reproduce bit for bit.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t key)
      : base_(mix64(seed ^ mix64(key ^ 0x5851f42d4c957f2dULL))) {}

  std::uint64_t next_u64() { return mix64(base_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal by Box-Muller; the second variate is cached.
  double normal();

private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace bwe
