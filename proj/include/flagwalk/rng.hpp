#pragma once

// Counter-based RNG (Philox4x32-10). Streams are addressed by
// (seed, stream, trial); draws depend only on that address and the
// draw counter, so parallel trials merge reproducibly in any order.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace flagwalk {

namespace detail {

inline std::array<uint32_t, 4> philox_block(std::array<uint32_t, 4> ctr,
                                            std::array<uint32_t, 2> key) {
  constexpr uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const uint64_t p0 = uint64_t(kMul0) * ctr[0];
    const uint64_t p1 = uint64_t(kMul1) * ctr[2];
    ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], uint32_t(p1),
           uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], uint32_t(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

}  // namespace detail

// Stream ids keep unrelated consumers of the same scenario seed apart.
enum class RngStream : uint32_t {
  words = 1,
  initial_conditions = 2,
  stationary_chain = 3,
  monte_carlo = 4,
  regularity = 5,
  tests = 6,
  tracking = 7,
};

class CounterRng {
 public:
  CounterRng(uint64_t seed, RngStream stream, uint64_t trial)
      : key_{uint32_t(seed), uint32_t(seed >> 32)},
        hi_{uint32_t(trial), uint32_t(trial >> 32) ^ (uint32_t(stream) * 0x85EBCA6Bu)} {}

  uint64_t next_u64() {
    if (have_ == 0) refill();
    return buf_[--have_];
  }

  // uniform on (0,1), never exactly 0 or 1
  double uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double gaussian() {
    if (have_gauss_) {
      have_gauss_ = false;
      return cached_gauss_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_gauss_ = r * std::sin(6.283185307179586476925287 * u2);
    have_gauss_ = true;
    return r * std::cos(6.283185307179586476925287 * u2);
  }

  // uniform integer in [0, bound)
  uint64_t uniform_int(uint64_t bound) {
    return uint64_t((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // index drawn from a cumulative distribution (cdf.back() == 1)
  int pick(const std::vector<double>& cdf) {
    const double u = uniform();
    int lo = 0, hi = int(cdf.size()) - 1;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (u <= cdf[mid])
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  }

 private:
  void refill() {
    const auto out = detail::philox_block(
        {uint32_t(counter_), uint32_t(counter_ >> 32), hi_[0], hi_[1]}, key_);
    ++counter_;
    buf_[0] = (uint64_t(out[0]) << 32) | out[1];
    buf_[1] = (uint64_t(out[2]) << 32) | out[3];
    have_ = 2;
  }

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 2> hi_;
  uint64_t counter_ = 0;
  std::array<uint64_t, 2> buf_{};
  int have_ = 0;
  bool have_gauss_ = false;
  double cached_gauss_ = 0.0;
};

}  // namespace flagwalk
