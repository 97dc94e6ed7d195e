#pragma once

#include <cstdint>

namespace wanova {

/// Counter-based generator built on the SplitMix64 finalizer (Steele,
/// Lea & Flood's mix constants). A draw is a pure function of
/// (seed, stream, counter), so substreams are derived by stream id and any
/// draw can be reproduced bit-for-bit regardless of evaluation order or
/// thread count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ + counter * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform draw strictly inside (0, 1): offset by half an ulp of the
  /// 53-bit grid so 0 and 1 are never produced.
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }
  std::uint64_t key_;
};

}  // namespace wanova
