#pragma once

#include <cstdint>

namespace hardpage::detail {

// SplitMix64. Used wherever reproducibility is part of the contract
// (fault injection plans, benchmark data): the output sequence for a given
// seed is fixed by this implementation, not by the standard library.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform-enough draw in [0, bound); bound must be nonzero. The modulo
  // bias is irrelevant at the bounds used here and keeps the sequence
  // portable across standard libraries.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

private:
  std::uint64_t state_;
};

} // namespace hardpage::detail
