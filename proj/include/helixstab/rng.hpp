#pragma once

#include <cstdint>

#include "helixstab/types.hpp"

namespace helixstab {

// splitmix64; self-contained so that seeded runs are reproducible across
// standard libraries.
struct SplitMix64 {
  uint64_t state;
  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  Real uniform01() { return (next() >> 11) * 0x1.0p-53; }
  Real symmetric() { return 2.0 * uniform01() - 1.0; }
  Vec3 symmetric_vec3() {
    const Real x = symmetric(), y = symmetric(), z = symmetric();
    return Vec3(x, y, z);
  }
};

}  // namespace helixstab
