#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace graphon_lab {

namespace detail {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based random stream keyed by (master seed, replication, label).
///
/// The i-th output is a pure function of the key and i, so streams for
/// different replications or labels never share state and can be created in
/// any order on any thread. Satisfies UniformRandomBitGenerator, so standard
/// distributions can draw from it.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t seed, std::uint64_t replication,
               std::string_view label)
      : key_(derive_key(seed, replication, label)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGoldenGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  double normal() { return normal_(*this); }

  std::uint64_t key() const { return key_; }

  static constexpr std::uint64_t derive_key(std::uint64_t seed,
                                            std::uint64_t replication,
                                            std::string_view label) {
    std::uint64_t k = detail::mix64(seed + detail::kGoldenGamma);
    k = detail::mix64(k ^ detail::mix64(replication + 2 * detail::kGoldenGamma));
    return detail::mix64(k ^ detail::fnv1a(label));
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

namespace streams {
inline constexpr std::string_view latents = "latents";
inline constexpr std::string_view edges = "edges";
inline constexpr std::string_view limit = "limit";
}  // namespace streams

}  // namespace graphon_lab
