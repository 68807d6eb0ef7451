#pragma once

#include <cstdint>
#include <string_view>

namespace synmind {

/// Counter-based random stream. Each draw hashes (key, counter), so streams
/// can be forked per sample / subject / repetition and replayed independently
/// of generation order. All output is a pure function of the key chain.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  /// Derives an independent stream. fork(a).fork(b) != fork(b).fork(a).
  CounterRng fork(std::uint64_t stream) const;
  CounterRng fork(std::string_view stream) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double next_uniform();

  /// Standard normal via Box-Muller (two uniforms per pair, cached second).
  double next_gaussian();

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

/// SplitMix64-style avalanche of a 64-bit value.
std::uint64_t mix_u64(std::uint64_t x);

/// Combines two 64-bit values into a well-mixed key.
std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b);

}  // namespace synmind
