#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace rcv {

/// Philox4x32-10 counter-based generator.
///
/// A stream is identified by (seed, replication, tag). Two streams with
/// different identities never share a counter block, so replications run in
/// any order or on any thread produce the same numbers.
class PhiloxStream {
public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  PhiloxStream(std::uint64_t seed, std::uint32_t replication, std::uint32_t tag)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        replication_(replication), tag_(tag) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (cursor_ == 4) {
      refill();
    }
    return buffer_[cursor_++];
  }

  /// Uniform draw on the open interval (0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = (*this)() >> 5;  // 27 bits
    const std::uint64_t lo = (*this)() >> 6;  // 26 bits
    const double u = (static_cast<double>((hi << 26) | lo) + 0.5) * 0x1.0p-53;
    return u;
  }

  double normal() { return normal_(*this); }

  double exponential() { return -std::log(uniform()); }

  double gamma(double shape) {
    std::gamma_distribution<double> dist(shape, 1.0);
    return dist(*this);
  }

  /// Raw Philox4x32-10 bijection, exposed for known-answer tests.
  static Block bijection(Block counter, Key key);

private:
  void refill() {
    const Block counter{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                        replication_, tag_};
    buffer_ = bijection(counter, key_);
    ++block_;
    cursor_ = 0;
  }

  Key key_;
  std::uint32_t replication_;
  std::uint32_t tag_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int cursor_ = 4;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline PhiloxStream::Block PhiloxStream::bijection(Block ctr, Key key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

// Layer tags used to carve substreams out of one replication.
namespace stream_tag {
inline constexpr std::uint32_t kCopulaInit = 1;
inline constexpr std::uint32_t kVolatility = 2;  // + asset index
inline constexpr std::uint32_t kPrice = 4;       // + asset index
inline constexpr std::uint32_t kMetropolis = 6;
inline constexpr std::uint32_t kBand = 16;
inline constexpr std::uint32_t kGof = 17;
inline constexpr std::uint32_t kSampling = 32;
}  // namespace stream_tag

}  // namespace rcv
