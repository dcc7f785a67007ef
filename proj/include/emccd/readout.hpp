#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "emccd/frame_stack.hpp"
#include "emccd/params.hpp"
#include "emccd/rng.hpp"

namespace emccd {

inline constexpr std::uint32_t kMaxCount = 65535;

enum class ReadoutMode {
  /// Photoelectrons pass the EM register (photon-counting operation).
  electron_multiplying,
  /// EM register bypassed: every electron adds exactly `gain` counts
  /// (proportional, analog operation).
  conventional,
};

/// Renders one photoelectron map into ADC counts: register output, plus with
/// probability cic_prob one spurious electron, plus Gaussian read noise, then
/// rounded and clamped to [0, 65535].
void render_frame(std::span<const std::uint32_t> photoelectrons, std::span<std::uint32_t> counts,
                  const EmccdParams& params, Rng& rng,
                  ReadoutMode mode = ReadoutMode::electron_multiplying);

std::vector<std::uint32_t> render_frame(std::span<const std::uint32_t> photoelectrons,
                                        const EmccdParams& params, Rng& rng,
                                        ReadoutMode mode = ReadoutMode::electron_multiplying);

/// Renders every frame of a photoelectron stack; frame f uses the stream
/// make_stream(seed, f, purpose), so the output does not depend on `threads`.
FrameStack render_stack(const FrameStack& photoelectrons, const EmccdParams& params,
                        std::uint64_t seed, StreamPurpose purpose,
                        ReadoutMode mode = ReadoutMode::electron_multiplying,
                        unsigned threads = 1);

/// Closed-shutter frames. n_frames = 0 yields an empty stack.
FrameStack render_dark_stack(std::size_t width, std::size_t height, std::size_t n_frames,
                             const EmccdParams& params, std::uint64_t seed, unsigned threads = 1);

/// Click map: 1 where counts > T (strict), else 0.
FrameStack apply_threshold(const FrameStack& counts, Threshold t);

/// Continuous level equivalent to the strict comparison `counts > T` on
/// round-to-nearest integer counts: floor(T) + 1/2, or +-infinity outside
/// the ADC range.
double click_level(Threshold t);

/// Model probability that a dark pixel's rendered counts exceed T.
double predicted_noise_click_rate(Threshold t, const EmccdParams& params);

/// Model probability that a single-photoelectron pixel's rendered counts
/// exceed T (no spurious charge).
double predicted_photon_click_rate(Threshold t, const EmccdParams& params);

/// Analog efficiency times predicted_photon_click_rate.
double predicted_efficiency(Threshold t, const EmccdParams& params);

}  // namespace emccd
