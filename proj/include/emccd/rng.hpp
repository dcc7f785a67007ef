#pragma once

#include <cstdint>
#include <random>

namespace emccd {

using Rng = std::mt19937_64;

/// Independent random substreams are keyed by (seed, frame index, purpose)
/// so that frames can be produced in any order or in parallel.
enum class StreamPurpose : std::uint64_t {
  source = 1,
  readout_beam1 = 2,
  readout_beam2 = 3,
  readout_dark = 4,
  test = 99,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t frame_index, StreamPurpose purpose) {
  const std::uint64_t key =
      splitmix64(splitmix64(seed) ^ splitmix64(frame_index + 0x632be59bd9b4e019ULL) ^
                 (static_cast<std::uint64_t>(purpose) << 56));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(frame_index), static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

/// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

}  // namespace emccd
