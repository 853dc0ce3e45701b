#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace qtime {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011).
/// A stream is identified by (seed, stream id); draws advance the low
/// counter words, so streams never overlap for fewer than 2^64 blocks.
class Philox {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        ctr_{0, 0, std::uint32_t(stream), std::uint32_t(stream >> 32)} {}

  static Block bijection(Block ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * ctr[2];
      ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
             std::uint32_t(p0)};
    }
    return ctr;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (idx_ == 4) refill();
    return buf_[idx_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = (*this)();
    return (hi << 32) | (*this)();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do v = next_u64();
    while (v >= limit);
    return v % n;
  }

  double normal() {
    // Box-Muller; one draw per call keeps the stream position simple.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * uniform());
  }

 private:
  void refill() {
    buf_ = bijection(ctr_, key_);
    if (++ctr_[0] == 0) ++ctr_[1];
    idx_ = 0;
  }

  Key key_;
  Block ctr_;
  Block buf_{};
  int idx_ = 4;
};

}  // namespace qtime
