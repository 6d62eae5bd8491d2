#include "qcd/random.hpp"

namespace qcd {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t absorb(std::uint64_t h, std::uint64_t word) noexcept {
  std::uint64_t state = h ^ word;
  return splitmix64(state);
}

}  // namespace

std::uint64_t derive_seed(const StreamKey& key) noexcept {
  std::uint64_t h = absorb(0x6a09e667f3bcc908ULL, key.master_seed);
  h = absorb(h, key.trial);
  // NONE and every valid change point (>= 1) map to distinct words.
  h = absorb(h, key.change_point ? static_cast<std::uint64_t>(*key.change_point) : 0);
  h = absorb(h, static_cast<std::uint64_t>(key.role));
  return h;
}

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

}  // namespace qcd
