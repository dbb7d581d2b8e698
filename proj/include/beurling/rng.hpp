#pragma once

#include <cstdint>

namespace beurling {

// Counter-based generator: the n-th output depends only on (seed, n), so
// streams can be consumed out of order and split across threads. The mixing
// function is SplitMix64's finalizer.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t operator()(std::uint64_t n) const noexcept {
    std::uint64_t z = seed_ + (n + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // +1 or -1 from bit 0 of the n-th output.
  constexpr int sign(std::uint64_t n) const noexcept {
    return ((*this)(n) & 1U) ? 1 : -1;
  }

  constexpr bool coin(std::uint64_t n) const noexcept {
    return ((*this)(n) & 1U) != 0;
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t n) const noexcept {
    return static_cast<double>((*this)(n) >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace beurling
