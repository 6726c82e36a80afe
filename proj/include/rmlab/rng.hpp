#pragma once

// Counter-based random streams (Philox4x32-10). Every draw is a pure function
// of (master seed, stream, counter), so results never depend on how work is
// split across threads.

#include <array>
#include <cstdint>
#include <limits>

namespace rmlab {

using Philox4x32Block = std::array<std::uint32_t, 4>;

constexpr Philox4x32Block philox4x32_10(Philox4x32Block ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
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

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Child stream id for sub-task `index` of a parent stream.
constexpr std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index) {
  return splitmix64(parent ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

/// Block `counter` of stream (seed, stream).
constexpr Philox4x32Block philox_block(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return philox4x32_10({static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
                       {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
}

/// Uniform in the open interval (0, 1) with 53 random bits.
constexpr double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// The k-th uniform of a stream; one Philox block per index.
constexpr double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t k) {
  const auto b = philox_block(seed, stream, k);
  return to_unit_open(b[0], b[1]);
}

// Sequential view of one stream. Satisfies UniformRandomBitGenerator so it
// can drive <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint32_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 4) {
      block_ = philox_block(seed_, stream_, counter_++);
      lane_ = 0;
    }
    return block_[lane_++];
  }

  double uniform() {
    const auto hi = (*this)();
    const auto lo = (*this)();
    return to_unit_open(hi, lo);
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = (*this)();
    return (hi << 32) | (*this)();
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32Block block_{};
  int lane_ = 4;
};

}  // namespace rmlab
