#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lseforge {

// Counter-style SplitMix64 generator (Steele, Lea & Flood; public-domain
// reference constants). Cheap to seed, trivially splittable: derived(i) opens
// an independent sub-stream keyed on (construction seed, i), so per-row draws
// do not depend on scheduling or call order.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform on [0, bound); mask-and-reject keeps every value equally likely.
  std::uint64_t bounded(std::uint64_t bound) {
    if (bound == 0) {
      throw std::invalid_argument("SplitMix64::bounded: bound must be positive");
    }
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      const std::uint64_t v = next() & mask;
      if (v < bound) return v;
    }
  }

  // Uniform double on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Sub-stream keyed on (construction seed, index). Independent of how many
  // draws this generator has already produced.
  SplitMix64 derived(std::uint64_t index) const {
    return SplitMix64(mix(seed_ + 0x9E3779B97F4A7C15ULL * (index + 1)));
  }

  std::uint64_t seed() const { return seed_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace lseforge
