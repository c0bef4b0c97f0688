// rng.hpp: counter-based random number generation (philox4x32-10).
//
// Reproducibility contract: a generator is addressed by (seed, stream) and a
// running 64-bit counter. Identical (seed, stream) produce identical draws on
// every platform; distinct streams are statistically independent, so e.g.
// request sampling never perturbs geometry draws. Gaussians use Box-Muller on
// explicit 53-bit uniforms to stay independent of libc distribution code.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace fran {

namespace detail {

// splitmix64, used to derive stream ids and per-trial seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Purpose labels for the independent streams used by the simulator.
enum class RngStream : std::uint64_t {
  kGeometry = 1,
  kFading = 2,
  kRequests = 3,
  kPrefetch = 4,
  kInit = 5,
};

// philox4x32-10 block cipher over a 128-bit counter with a 64-bit key.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        stream_(stream) {}

  Philox(std::uint64_t seed, RngStream stream)
      : Philox(seed, static_cast<std::uint64_t>(stream)) {}

  // Derive an independent child generator; mixing keeps (seed, stream,
  // label) collisions out of reach for any practical label count.
  Philox split(std::uint64_t label) const {
    std::uint64_t seed = (static_cast<std::uint64_t>(key1_) << 32) | key0_;
    return Philox(seed, detail::splitmix64(stream_ ^ detail::splitmix64(label)));
  }

  std::uint32_t next_u32() {
    if (have_ == 0) refill();
    return block_[--have_];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on [0,1) with 53 random bits, the usual double mapping.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal pair via Box-Muller; uniform u is nudged away from 0.
  std::array<double, 2> next_normal_pair() {
    double u = next_double();
    double v = next_double();
    if (u <= 0.0) u = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u));
    double a = 6.283185307179586476925286766559 * v;
    return {r * std::cos(a), r * std::sin(a)};
  }

  double next_normal() {
    if (have_normal_) {
      have_normal_ = false;
      return spare_normal_;
    }
    auto [a, b] = next_normal_pair();
    spare_normal_ = b;
    have_normal_ = true;
    return a;
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(a) * b) >> 32);
  }

  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(ctr_);
    std::uint32_t c1 = static_cast<std::uint32_t>(ctr_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0 = mulhi(0xD2511F53u, c0), lo0 = 0xD2511F53u * c0;
      std::uint32_t hi1 = mulhi(0xCD9E8D57u, c2), lo1 = 0xCD9E8D57u * c2;
      std::uint32_t n0 = hi1 ^ c1 ^ k0, n1 = lo1;
      std::uint32_t n2 = hi0 ^ c3 ^ k1, n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    block_ = {c0, c1, c2, c3};
    have_ = 4;
    ++ctr_;
  }

  std::uint32_t key0_, key1_;
  std::uint64_t stream_;
  std::uint64_t ctr_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int have_ = 0;
  double spare_normal_ = 0.0;
  bool have_normal_ = false;
};

// Stable combine for per-trial seed derivation (sweep cells etc.).
inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return detail::splitmix64(h ^ detail::splitmix64(v));
}

inline std::uint64_t hash_combine(std::uint64_t h, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  __builtin_memcpy(&bits, &v, sizeof(bits));
  return hash_combine(h, bits);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::string_view s) {
  std::uint64_t acc = 0xcbf29ce484222325ULL;
  for (char c : s) acc = (acc ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  return hash_combine(h, acc);
}

}  // namespace fran
