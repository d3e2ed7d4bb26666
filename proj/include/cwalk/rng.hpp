#pragma once

#include <array>
#include <cstdint>

// Counter-based random streams (Philox4x32-10). Every draw is a pure function
// of (master seed, trial, stream tag, draw index), so trials can run in any
// order or in parallel and still reproduce bit-identically, and a draw keyed
// to an interaction id is independent of where that interaction lands in a
// sequencing order.

namespace cwalk {

namespace detail {

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> ctr,
                                             std::array<uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const uint64_t p0 = uint64_t(kPhiloxM0) * ctr[0];
    const uint64_t p1 = uint64_t(kPhiloxM1) * ctr[2];
    const uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    const uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

}  // namespace detail

// Stream tags keep draws for different purposes statistically independent even
// when they share a draw index.
enum class StreamTag : uint32_t {
  kDirection = 0,   // +-1 shift direction per interaction
  kStepSize = 1,    // per-step size draw in variable-step mode
  kSelection = 2,   // detector selection in multi-outcome scenarios
  kSequencer = 3,   // linear-extension sampling
  kProbe = 4,       // random probe states/bases
  kGeneric = 5,
};

class TrialRng {
 public:
  TrialRng(uint64_t master_seed, uint32_t trial)
      : key_{uint32_t(master_seed), uint32_t(master_seed >> 32)}, trial_(trial) {}

  std::array<uint32_t, 4> block(StreamTag tag, uint64_t index) const {
    return detail::philox4x32_10(
        {uint32_t(index), uint32_t(index >> 32), trial_, uint32_t(tag)}, key_);
  }

  uint32_t u32(StreamTag tag, uint64_t index, int lane = 0) const {
    return block(tag, index)[lane & 3];
  }

  uint64_t u64(StreamTag tag, uint64_t index) const {
    const auto b = block(tag, index);
    return (uint64_t(b[1]) << 32) | b[0];
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform(StreamTag tag, uint64_t index) const {
    return double(u64(tag, index) >> 11) * 0x1.0p-53;
  }

  // Unbiased +-1 draw; four draws share one Philox block.
  int direction(uint64_t step) const {
    const auto b = block(StreamTag::kDirection, step >> 2);
    return (b[step & 3] >> 31) ? 1 : -1;
  }

  uint32_t trial() const { return trial_; }

 private:
  std::array<uint32_t, 2> key_;
  uint32_t trial_;
};

// Direction draws with the four-per-block packing cached, for hot loops.
// at(step) equals TrialRng::direction(step) for every step.
class DirectionStream {
 public:
  explicit DirectionStream(const TrialRng& rng) : rng_(rng) {}

  int at(uint64_t step) {
    const uint64_t blk = step >> 2;
    if (blk != cached_block_) {
      buf_ = rng_.block(StreamTag::kDirection, blk);
      cached_block_ = blk;
    }
    return (buf_[step & 3] >> 31) ? 1 : -1;
  }

 private:
  TrialRng rng_;
  uint64_t cached_block_ = ~uint64_t(0);
  std::array<uint32_t, 4> buf_{};
};

}  // namespace cwalk
