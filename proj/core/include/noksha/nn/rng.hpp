#pragma once

#include <cstdint>

namespace noksha::nn {

/// Counter-based generator: output i is a SplitMix64 finalisation of key + i * golden.
/// State is just (key, counter), so it serialises trivially, and `split` derives
/// independent streams without consuming from the parent.
class CounterRng {
 public:
  static constexpr const char* kName = "splitmix64-counter";

  explicit CounterRng(std::uint64_t seed = 0) : key_(mix(seed ^ 0x6a09e667f3bcc908ULL)) {}
  static CounterRng from_state(std::uint64_t key, std::uint64_t counter) {
    CounterRng r;
    r.key_ = key;
    r.counter_ = counter;
    return r;
  }

  std::uint64_t next_u64() { return mix(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform in [0, 1) with 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box–Muller (one draw per call, two uniforms consumed).
  double normal();

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Independent child stream identified by `stream`.
  CounterRng split(std::uint64_t stream) const {
    CounterRng r;
    r.key_ = mix(key_ ^ mix(stream + 0xbb67ae8584caa73bULL));
    return r;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace noksha::nn
