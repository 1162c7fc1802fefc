#pragma once

#include <cstdint>
#include <utility>

namespace tdiff {

// Counter-based PRNG: Philox 2x64 with 10 rounds.
//
// One block maps (counter0, counter1, key) to two 64-bit words through 10
// rounds of  (hi, lo) = mulhilo(x0 * M); x0' = hi ^ key ^ x1; x1' = lo;
// key' = key + W  with M = 0xD2B74407B1CE6E85 and Weyl constant
// W = 0x9E3779B97F4A7C15.  The generator is seedable (key = seed),
// splittable into independent streams (counter1 = stream id), and
// reproducible across platforms as pure integer arithmetic.
//
// The algorithm identifier recorded in reports is kAlgorithmId.

inline constexpr const char* kPrngAlgorithmId = "philox2x64-10";

// Stateless block function: key = seed, counter = (index, stream).
std::pair<std::uint64_t, std::uint64_t> philox2x64(std::uint64_t seed, std::uint64_t index,
                                                   std::uint64_t stream);

// Deterministically derives a sub-seed for an independent purpose tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// Sequential convenience wrapper over the block function.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double next_uniform();

  // Standard normal via Box-Muller on one Philox block per pair.
  double next_normal();

  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  std::uint64_t buffered_word_ = 0;
  bool has_word_ = false;
  double buffered_normal_ = 0.0;
  bool has_normal_ = false;
};

}  // namespace tdiff
