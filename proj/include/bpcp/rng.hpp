#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace bpcp {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Streams are
// cheap: the 64-bit key is the seed, the high counter words carry a stream
// id, so (seed, stream) pairs give independent, reproducible sequences that
// can be consumed in parallel without coordination.
namespace philox {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Block round10(Block ctr, Key key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// One deterministic random stream. Distinct (seed, stream) pairs are
/// statistically independent; the same pair always replays the same values.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        hi0_(static_cast<std::uint32_t>(stream)),
        hi1_(static_cast<std::uint32_t>(stream >> 32)) {}

  /// Derive a sub-stream; ids hashed so nested derivations do not collide.
  RngStream derive(std::uint64_t id) const {
    const std::uint64_t mixed =
        splitmix64((static_cast<std::uint64_t>(hi1_) << 32 | hi0_) ^
                   splitmix64(id + 0x51eded51ull));
    std::uint64_t seed = static_cast<std::uint64_t>(key_[1]) << 32 | key_[0];
    return RngStream(seed, mixed);
  }

  std::uint32_t next_u32() {
    if (have_ == 0) refill();
    return buf_[--have_];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return hi << 32 | next_u32();
  }

  /// Uniform on the open interval (0, 1); never returns an endpoint.
  double next_open01() {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1p-52;
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1p-53;
  }

  /// Standard normal via Box-Muller (pairwise, second value cached).
  double next_normal() {
    if (has_cached_normal_) {
      has_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 = next_open01();
    const double u2 = next_open01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(t);
    has_cached_normal_ = true;
    return r * std::cos(t);
  }

  /// Standard Cauchy: tan(pi (U - 1/2)) with U uniform on (0, 1).
  double next_cauchy() {
    return std::tan(3.14159265358979323846264338328 *
                    (next_open01() - 0.5));
  }

 private:
  void refill() {
    philox::Block out =
        philox::round10({static_cast<std::uint32_t>(ctr_),
                         static_cast<std::uint32_t>(ctr_ >> 32), hi0_, hi1_},
                        key_);
    ++ctr_;
    for (int i = 0; i < 4; ++i) buf_[i] = out[static_cast<size_t>(i)];
    have_ = 4;
  }

  philox::Key key_;
  std::uint32_t hi0_, hi1_;
  std::uint64_t ctr_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int have_ = 0;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace bpcp
