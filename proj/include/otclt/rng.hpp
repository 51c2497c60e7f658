#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace otclt {

/// Deterministic named substreams on top of std::mt19937_64.
///
/// A stream is identified by (seed, label, substream). The label keeps
/// independent generators (e.g. the P-side and Q-side of an experiment)
/// decorrelated while the substream index separates replications. Two
/// streams built from identical identifiers produce bit-identical output.
/// Floating-point draws are derived from raw engine words here instead of
/// going through std::uniform_real_distribution, whose mapping is
/// implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label, std::uint64_t substream = 0)
      : engine_(mix(seed, fnv1a(label), substream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw in [0, 1) with 53 random mantissa bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform draw strictly inside (0, 1); safe input for quantile functions.
  double uniform01_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via the inverse CDF (declared in stats.hpp).
  double normal01();

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Plain modulo is biased; reject draws from the tail region instead.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t label_hash,
                           std::uint64_t substream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= label_hash;
    std::uint64_t b = splitmix64(s);
    s ^= substream * 0x2545f4914f6cdd1dull + 0x9e3779b97f4a7c15ull;
    std::uint64_t c = splitmix64(s);
    return a ^ (b << 1) ^ (c >> 1);
  }

  std::mt19937_64 engine_;
};

}  // namespace otclt
