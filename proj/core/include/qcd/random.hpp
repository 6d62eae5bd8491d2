#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace qcd {

/// What a random stream is used for. Part of the stream key so that, e.g., the
/// observation noise of a trial never shares bits with auxiliary draws.
enum class StreamRole : std::uint64_t {
  observations = 1,
  trajectory = 2,
  auxiliary = 3,
};

/// Identifies one independent stream. Two equal keys always produce the same
/// sequence; the order in which streams are created is irrelevant.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t trial = 0;
  std::optional<std::int64_t> change_point;
  StreamRole role = StreamRole::observations;
};

/// Hashes a key into a 64-bit seed (splitmix64 finalizer chained over the fields).
std::uint64_t derive_seed(const StreamKey& key) noexcept;

/// xoshiro256++ seeded through splitmix64. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

/// Engine plus the two variates the library needs. Normal draws use the
/// ziggurat sampler from Boost.Random, which is stateless between calls and
/// identical on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) noexcept : engine_(seed) {}
  explicit RandomStream(const StreamKey& key) noexcept : engine_(derive_seed(key)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Xoshiro256& engine() noexcept { return engine_; }

 private:
  Xoshiro256 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_01<double> uniform_;
};

}  // namespace qcd
