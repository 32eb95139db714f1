#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace silent {

// Counter-based random streams.
//
// A stream is keyed by (seed, tag, index) through a SplitMix64 finalizer; the
// n-th output of a stream is mix(key + n * golden). Streams never share state,
// so per-sample generation is independent of evaluation order and of how work
// is split across threads.
//
// Normals use the Box-Muller transform. Both outputs of a pair are consumed,
// cos branch first. This choice is part of the determinism contract: changing
// it changes every dataset.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a child seed; used for hash(master, config id, seed index) style keys.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) noexcept {
  return mix64(mix64(seed + kGolden) ^ (a + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(seed, a), b);
}

// Stream tags keep data draws and suppression noise from aliasing.
namespace stream {
inline constexpr std::uint64_t data = 0x64617461;        // "data"
inline constexpr std::uint64_t noise = 0x6e6f697365;     // "noise"
inline constexpr std::uint64_t mixing = 0x6d6978;        // "mix"
inline constexpr std::uint64_t pretrain = 0x707265;      // "pre"
inline constexpr std::uint64_t split = 0x73706c6974;     // "split"
inline constexpr std::uint64_t batch = 0x6261746368;     // "batch"
inline constexpr std::uint64_t test = 0x74657374;        // "test"
}  // namespace stream

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) noexcept
      : key_(derive_seed(seed, tag, index)) {}

  std::uint64_t next_u64() noexcept { return mix64(key_ + (++counter_) * kGolden); }

  /// Uniform on (0, 1]; never returns 0 so log() in Box-Muller is finite.
  double uniform() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace silent
