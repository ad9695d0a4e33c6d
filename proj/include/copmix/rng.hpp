#pragma once

#include <array>
#include <cstdint>

namespace copmix {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
// A 64-bit seed is the key, a 64-bit stream index is the counter; every
// (seed, index) pair maps to an independent 128-bit block, so draws can be
// indexed by simulation step and reproduced bitwise on any platform.
// Constants and the reference output blocks are the published ones; the
// known-answer vectors are asserted in the test suite.
class Philox {
public:
  static constexpr const char* kGeneratorId = "philox4x32-10";

  static std::array<std::uint32_t, 4> block(std::uint64_t key, std::uint64_t counter) noexcept {
    std::uint32_t x0 = static_cast<std::uint32_t>(counter);
    std::uint32_t x1 = static_cast<std::uint32_t>(counter >> 32);
    std::uint32_t x2 = 0;
    std::uint32_t x3 = 0;
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * x0;
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * x2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      x0 = hi1 ^ x1 ^ k0;
      x1 = lo1;
      x2 = hi0 ^ x3 ^ k1;
      x3 = lo0;
      k0 += 0x9E3779B9u;  // golden ratio
      k1 += 0xBB67AE85u;  // sqrt(3) - 1
    }
    return {x0, x1, x2, x3};
  }

  // Raw block for arbitrary 128-bit counters; used only by the known-answer tests.
  static std::array<std::uint32_t, 4> block_raw(const std::array<std::uint32_t, 4>& ctr,
                                                const std::array<std::uint32_t, 2>& key) noexcept {
    std::uint32_t x0 = ctr[0], x1 = ctr[1], x2 = ctr[2], x3 = ctr[3];
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * x0;
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * x2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      x0 = hi1 ^ x1 ^ k0;
      x1 = lo1;
      x2 = hi0 ^ x3 ^ k1;
      x3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return {x0, x1, x2, x3};
  }

  // Uniform draw strictly inside (0,1): the top 53 bits of lanes 0..1 plus a
  // half-ulp offset, so 0 and 1 are never produced.
  static double uniform01(std::uint64_t seed, std::uint64_t index) noexcept {
    const auto b = block(seed, index);
    const std::uint64_t bits = (std::uint64_t{b[0]} << 32) | b[1];
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }
};

}  // namespace copmix
