#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace boa {

// Seed splitting.
//
// Every random stream in the library is derived from one 64-bit master seed
// by a counter-based rule: the child seed for a path of stream ids
// (s1, s2, ...) is computed by folding each id into the running state with
// splitmix64, i.e. state = splitmix64(state ^ splitmix64(id + 1)). A chain,
// fold, or replicate therefore gets the same stream no matter which thread
// runs it or in which order streams are created.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = splitmix64(master);
  for (std::uint64_t id : path) state = splitmix64(state ^ splitmix64(id + 1));
  return state;
}

// Stream ids used with derive_seed. Kept in one place so that no two
// consumers share a stream by accident.
namespace stream {
inline constexpr std::uint64_t kChain = 1;
inline constexpr std::uint64_t kFold = 2;
inline constexpr std::uint64_t kReplicate = 3;
inline constexpr std::uint64_t kNoise = 4;
inline constexpr std::uint64_t kSplit = 5;
inline constexpr std::uint64_t kGrid = 6;
inline constexpr std::uint64_t kInstance = 7;
}  // namespace stream

// xoshiro256** with portable, implementation-independent helpers for the
// few distributions the search needs. std:: distributions are avoided so
// that artifacts are identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s = splitmix64(s);
      w = s;
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform integer in [0, n). n must be > 0. Lemire's multiply-shift with
  // rejection, so the result is exactly uniform.
  std::uint64_t below(std::uint64_t n) {
    __extension__ using u128 = unsigned __int128;
    u128 m = static_cast<u128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<u128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Poisson draw by sequential inversion. Adequate for the small rates used
  // for set sizes; rates above ~700 would underflow exp(-lambda).
  std::uint64_t poisson(double lambda) {
    const double u = uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf && k < 100000) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
      if (p == 0.0 && cdf < u) break;
    }
    return k;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4]{};
};

}  // namespace boa
