#pragma once

#include <array>
#include <cstdint>

namespace auctionshape {

//! Philox4x32-10 counter-based generator (Salmon et al. 2011).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  //! The high counter words name an independent stream.
  Philox4x32(std::uint64_t key, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        ctr_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  static Counter block(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
      if (r) {
        k[0] += kW0;
        k[1] += kW1;
      }
      std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
      std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }
    return c;
  }

  std::uint32_t next_u32() {
    if (used_ == 4) {
      buf_ = block(ctr_, key_);
      if (++ctr_[0] == 0) ++ctr_[1];
      used_ = 0;
    }
    return buf_[used_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  //! Uniform on (0,1) with 53 random bits; never returns 0 or 1.
  double uniform01() { return ((next_u64() >> 11) + 0.5) * 0x1.0p-53; }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  Key key_;
  Counter ctr_;
  Counter buf_{};
  int used_ = 4;
};

}  // namespace auctionshape
