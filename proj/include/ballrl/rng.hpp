#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>

namespace ballrl {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

/// xoshiro256** seeded through splitmix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t s_[4];
};

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Xoshiro256& rng);
double uniform(Xoshiro256& rng, double lo, double hi);
double standard_normal(Xoshiro256& rng);
std::size_t sample_categorical(Xoshiro256& rng, std::span<const double> probs);

/// Counter-based stream splitting: a stream is a 64-bit key; children are derived
/// by hashing (key, label) so that every (phase, policy label, trajectory index)
/// owns an independent generator regardless of execution order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root_seed) : key_(splitmix64(root_seed ^ 0x6a09e667f3bcc909ULL)) {}

  RngStream child(std::string_view label) const { return child_raw(fnv1a64(label)); }
  RngStream child(std::uint64_t index) const { return child_raw(splitmix64(index + 0x9e3779b97f4a7c15ULL)); }

  Xoshiro256 generator() const { return Xoshiro256(key_); }
  std::uint64_t key() const { return key_; }

 private:
  struct RawKey {};
  RngStream(RawKey, std::uint64_t key) : key_(key) {}
  RngStream child_raw(std::uint64_t salt) const {
    return RngStream(RawKey{}, splitmix64(key_ ^ splitmix64(salt)));
  }

  std::uint64_t key_;
};

}  // namespace ballrl
