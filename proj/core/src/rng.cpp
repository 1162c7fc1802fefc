#include "thermodiffuse/rng.hpp"

#include <cmath>

namespace tdiff {

namespace {

constexpr std::uint64_t kMult = 0xD2B74407B1CE6E85ULL;
constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::pair<std::uint64_t, std::uint64_t> philox2x64(std::uint64_t seed, std::uint64_t index,
                                                   std::uint64_t stream) {
  std::uint64_t x0 = index;
  std::uint64_t x1 = stream;
  std::uint64_t key = seed;
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi, lo;
    mulhilo(x0, kMult, hi, lo);
    x0 = hi ^ key ^ x1;
    x1 = lo;
    key += kWeyl;
  }
  return {x0, x1};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  // Dedicated stream id reserved for seed derivation.
  return philox2x64(seed, tag, 0x7365656464657276ULL).first;
}

std::uint64_t Rng::next_u64() {
  if (has_word_) {
    has_word_ = false;
    return buffered_word_;
  }
  auto [w0, w1] = philox2x64(seed_, index_++, stream_);
  buffered_word_ = w1;
  has_word_ = true;
  return w0;
}

double Rng::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_normal() {
  if (has_normal_) {
    has_normal_ = false;
    return buffered_normal_;
  }
  auto [w0, w1] = philox2x64(seed_, index_++, stream_);
  // u1 in (0, 1] so the log is finite; u2 in [0, 1).
  const double u1 = (static_cast<double>(w0 >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(w1 >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  buffered_normal_ = r * std::sin(a);
  has_normal_ = true;
  return r * std::cos(a);
}

}  // namespace tdiff
