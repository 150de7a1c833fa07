#pragma once

// Counter-based random streams.
//
// Every variate is a pure function of (master_seed, stream_id, position):
// a Philox4x32-10 block cipher keyed by the master seed encrypts the counter
// (stream_id, block). Substream i is therefore reachable in O(1), which is
// what lets ensembles hand path i its own stream regardless of how paths are
// scheduled across workers.

#include <array>
#include <cstdint>
#include <limits>

namespace srw {

class RandomStream {
public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    if (lane_ == 2) refill();
    return buffer_[lane_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); never returns 0.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Unbiased uniform integer on {0, ..., bound - 1}; bound >= 1.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Bernoulli(prob); consumes one word for 0 < prob < 1 and none otherwise.
  bool bernoulli(double prob) {
    if (prob <= 0.0) return false;
    if (prob >= 1.0) return true;
    return uniform01() < prob;
  }

  double standard_normal();

private:
  void refill();

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  unsigned lane_ = 2;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Deterministic substream for (master_seed, stream_id).
inline RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return RandomStream(master_seed, stream_id);
}

/// Named stream roles live far above any path index.
namespace stream_role {
inline constexpr std::uint64_t projection_directions = 0xD1EC'0000'0000'0001ULL;
}

/// The raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

}  // namespace srw
