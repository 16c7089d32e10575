#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace majority {

/// SplitMix64 finalizer. Used for seeding and for per-replicate stream splitting.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of replicate `index` under `master_seed`:
///   splitmix64(master_seed ^ splitmix64(index))
/// Fixed so that experiment output is reproducible from (master_seed, index)
/// alone, independent of scheduling.
constexpr std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
  return splitmix64(master_seed ^ splitmix64(index));
}

/// xoshiro256** 1.0 (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
/// The four state words are filled from a SplitMix64 sequence started at the seed.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) noexcept { reseed(seed); }

  void reseed(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      w = splitmix64(x);
      x += 0x9E3779B97F4A7C15ull;
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  friend bool operator==(const Xoshiro256&, const Xoshiro256&) = default;

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// A probability in [0, 1] quantized to the 64-bit fixed-point grid, ready for
/// bit-sliced Bernoulli sampling. Values at or above 2^-11 are represented
/// exactly (a double carries at most 53 significant bits).
class LaneProbability {
 public:
  constexpr LaneProbability() = default;

  explicit LaneProbability(double p) {
    if (!(p > 0.0)) {
      kind_ = Kind::Never;
    } else if (p >= 1.0) {
      kind_ = Kind::Always;
    } else {
      kind_ = Kind::Fraction;
      threshold_ = static_cast<std::uint64_t>(std::ldexp(p, 64));
      if (threshold_ == 0) kind_ = Kind::Never;
    }
  }

  constexpr bool never() const noexcept { return kind_ == Kind::Never; }
  constexpr bool always() const noexcept { return kind_ == Kind::Always; }
  constexpr std::uint64_t threshold() const noexcept { return threshold_; }

 private:
  enum class Kind : std::uint8_t { Never, Always, Fraction };
  Kind kind_ = Kind::Never;
  std::uint64_t threshold_ = 0;
};

/// 64 independent Bernoulli(p) bits.
///
/// Each lane compares a lazily revealed uniform fraction U against p, most
/// significant bit first; a lane is decided at the first bit where U and p
/// differ, and lanes still tied once p has no set bits left have U >= p.
/// One generator word is drawn per revealed bit. When p has set bits beyond
/// the first ten, those ten levels are always drawn (unrolled, branch-free);
/// after that drawing stops as soon as every lane is decided. Cost is about
/// 10 words for generic p and a single word for p = 1/2.
template <class URBG>
std::uint64_t bernoulli_lanes(URBG& rng, const LaneProbability& prob) {
  if (prob.never()) return 0;
  if (prob.always()) return ~std::uint64_t{0};
  constexpr int kEager = 10;
  const std::uint64_t t = prob.threshold();
  const int last = std::countr_zero(t);
  std::uint64_t undecided = ~std::uint64_t{0};
  std::uint64_t result = 0;
  int bit = 63;
  if (last <= 63 - kEager) {
#pragma GCC unroll 16
    for (int k = 0; k < kEager; ++k) {
      const std::uint64_t r = static_cast<std::uint64_t>(rng());
      const std::uint64_t m = std::uint64_t{0} - ((t >> (63 - k)) & 1u);
      result |= undecided & ~r & m;
      undecided &= ~(r ^ m);
    }
    bit = 63 - kEager;
  }
  for (; bit >= last && undecided != 0; --bit) {
    const std::uint64_t r = static_cast<std::uint64_t>(rng());
    const std::uint64_t m = std::uint64_t{0} - ((t >> bit) & 1u);
    result |= undecided & ~r & m;
    undecided &= ~(r ^ m);
  }
  return result;
}

}  // namespace majority
