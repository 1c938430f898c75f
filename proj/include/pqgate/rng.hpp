#ifndef PQGATE_RNG_HPP
#define PQGATE_RNG_HPP

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace pqgate {

// Seedable, splittable generator. Every stream is fully determined by a root
// seed plus a path of stream indices, so Monte Carlo trial k can draw from
// Rng(seed).split(k) independently of how trials are scheduled.
//
// Engine: xoshiro256**; state expansion and path mixing: splitmix64.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) { reseed(seed); }

  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = mix(seed);
    for (auto p : path) key = mix(key ^ mix(p + 0x632be59bd9b4e019ULL));
    reseed(key);
  }

  // Child stream; does not advance this generator.
  [[nodiscard]] Rng split(std::uint64_t index) const {
    return Rng(mix(s_[0] ^ mix(s_[3] + index)) ^ mix(index ^ 0xd1b54a32d192ed03ULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : s_) {
      x += 0x9e3779b97f4a7c15ULL;
      word = mix(x);
    }
  }

  std::array<std::uint64_t, 4> s_{};
};

}  // namespace pqgate

#endif  // PQGATE_RNG_HPP
