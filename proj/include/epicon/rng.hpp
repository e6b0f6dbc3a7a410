#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace epicon {

namespace detail {

// Finalizer of the splitmix64 generator.  Also used to mix label hashes when
// deriving sub-streams.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a hash of a label, used to turn human-readable stream names into
// 64-bit salt values.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Deterministic random generator with named sub-streams.
//
// The engine is splitmix64: the exact bit sequence depends only on the seed,
// never on the platform, standard library, or call site.  `fork` derives an
// independent generator from the *original* seed plus a label, so the layout
// of the stream tree is stable no matter how many numbers the parent has
// already produced.  That property is what makes two different training
// drivers consume identical noise when they draw from identically labelled
// streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : root_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::splitmix64_mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits (every value exactly representable).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).  Uses 64-bit modulo; the bias for the n values
  // used here (buffer sizes < 2^20) is far below 2^-40 and irrelevant.
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller.  Always consumes exactly two uniforms and
  // never caches the second deviate, so the stream position after k calls is
  // 2k regardless of history.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // guard log(0)
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Child generator derived from this generator's seed and a label.
  Rng fork(std::string_view label) const {
    std::uint64_t salt = detail::fnv1a64(label);
    return Rng(detail::splitmix64_mix(root_ ^ salt));
  }

  // Child generator for indexed families of streams ("actor" 0, 1, ...).
  Rng fork(std::string_view label, std::uint64_t index) const {
    std::uint64_t salt = detail::fnv1a64(label);
    salt = detail::splitmix64_mix(salt + 0x9e3779b97f4a7c15ULL * (index + 1));
    return Rng(detail::splitmix64_mix(root_ ^ salt));
  }

  std::uint64_t seed() const { return root_; }

 private:
  std::uint64_t root_;   // seed at construction; forks derive from this
  std::uint64_t state_;  // advances as numbers are drawn
};

}  // namespace epicon
