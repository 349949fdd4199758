#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace darkcool {

__extension__ using uint128 = unsigned __int128;

/// Philox4x64-10 counter-based generator. The stream advances the 256-bit
/// counter before each block, so a fresh engine with key (k0, k1) produces
/// the same sequence as numpy.random.Philox(key=k0 | k1 << 64).
class Philox4x64 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint64_t, 4>;

  explicit Philox4x64(std::uint64_t k0 = 0, std::uint64_t k1 = 0) : key_{k0, k1} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  static Block block(Block ctr, std::array<std::uint64_t, 2> key) {
    constexpr std::uint64_t m0 = 0xD2E7470EE14C6C93ULL, m1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t w0 = 0x9E3779B97F4A7C15ULL, w1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += w0;
        key[1] += w1;
      }
      const uint128 p0 = static_cast<uint128>(m0) * ctr[0];
      const uint128 p1 = static_cast<uint128>(m1) * ctr[2];
      const auto hi0 = static_cast<std::uint64_t>(p0 >> 64), lo0 = static_cast<std::uint64_t>(p0);
      const auto hi1 = static_cast<std::uint64_t>(p1 >> 64), lo1 = static_cast<std::uint64_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  result_type operator()() {
    if (pos_ == 4) {
      for (auto& w : counter_)
        if (++w != 0) break;
      buffer_ = block(counter_, key_);
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::array<std::uint64_t, 2> key_;
  Block counter_{0, 0, 0, 0};
  Block buffer_{};
  int pos_ = 4;
};

}  // namespace darkcool
