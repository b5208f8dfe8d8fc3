#pragma once

#include <cstdint>
#include <initializer_list>

namespace cellopt {

// Mixing finalizer used both to expand seeds and to derive independent
// substreams. Substream ids are built by folding salts into the state, so
// stream(seed, cell, day) is reproducible regardless of generation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ (0x9e3779b97f4a7c15ULL + (salt << 6) + (salt >> 2)));
}

inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> salts) {
  std::uint64_t s = splitmix64(seed);
  for (std::uint64_t salt : salts) s = hash_combine(s, salt);
  return s;
}

// Small FNV-1a over a string, for readable stream labels.
inline std::uint64_t label_hash(const char* s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (; *s; ++s) h = (h ^ static_cast<unsigned char>(*s)) * 0x100000001b3ULL;
  return h;
}

// xoshiro256++ with splitmix64 state expansion. Deterministic and portable;
// the standard <random> distributions are implementation-defined, so all
// sampling in this library goes through this struct.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t x = seed;
    for (auto& si : s_) si = (x = splitmix64(x + 0x9e3779b97f4a7c15ULL));
  }

  std::uint64_t next_u64() {
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

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n) via 128-bit multiply (bias < 2^-64, no loop).
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace cellopt
