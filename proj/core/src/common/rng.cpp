#include "synmind/common/rng.hpp"

#include <cmath>
#include <numbers>

#include "synmind/common/hash.hpp"

namespace synmind {

std::uint64_t mix_u64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_u64(std::uint64_t a, std::uint64_t b) {
  return mix_u64(mix_u64(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

CounterRng CounterRng::fork(std::uint64_t stream) const {
  return CounterRng(mix_u64(key_, stream));
}

CounterRng CounterRng::fork(std::string_view stream) const {
  return fork(fnv1a64(stream));
}

std::uint64_t CounterRng::next_u64() { return mix_u64(key_, counter_++); }

double CounterRng::next_uniform() {
  // 53 random bits -> double in [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  double u1 = next_uniform();
  double u2 = next_uniform();
  while (u1 <= 0.0) u1 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_gaussian_ = r * std::sin(theta);
  has_cached_gaussian_ = true;
  return r * std::cos(theta);
}

std::uint64_t CounterRng::next_below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection-free modulo is fine here: n is tiny relative to 2^64.
  return next_u64() % n;
}

}  // namespace synmind
