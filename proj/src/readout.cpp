#include "emccd/readout.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "emccd/error.hpp"
#include "emccd/model.hpp"
#include "emccd/parallel.hpp"

namespace emccd {

namespace {

std::uint32_t quantize(double x) {
  if (!(x > 0.0)) return 0;
  if (x >= kMaxCount) return kMaxCount;
  return static_cast<std::uint32_t>(std::nearbyint(x));
}

}  // namespace

void render_frame(std::span<const std::uint32_t> photoelectrons, std::span<std::uint32_t> counts,
                  const EmccdParams& params, Rng& rng, ReadoutMode mode) {
  params.validate();
  require(photoelectrons.size() == counts.size(), ErrorCode::invalid_parameter,
          "input and output frames differ in size");
  std::normal_distribution<double> read_noise(params.bias, params.read_noise);
  for (std::size_t i = 0; i < photoelectrons.size(); ++i) {
    const auto n = photoelectrons[i];
    const bool spurious = uniform01(rng) < params.cic_prob;
    double x = 0.0;
    if (mode == ReadoutMode::electron_multiplying) {
      x = sample_em_output(static_cast<int>(n), params.gain, rng);
      if (spurious) x += sample_em_output(1, params.cic_gain, rng);
    } else {
      x = params.gain * (static_cast<double>(n) + (spurious ? 1.0 : 0.0));
    }
    counts[i] = quantize(x + read_noise(rng));
  }
}

std::vector<std::uint32_t> render_frame(std::span<const std::uint32_t> photoelectrons,
                                        const EmccdParams& params, Rng& rng, ReadoutMode mode) {
  std::vector<std::uint32_t> counts(photoelectrons.size());
  render_frame(photoelectrons, counts, params, rng, mode);
  return counts;
}

FrameStack render_stack(const FrameStack& photoelectrons, const EmccdParams& params,
                        std::uint64_t seed, StreamPurpose purpose, ReadoutMode mode,
                        unsigned threads) {
  require(photoelectrons.kind() == FrameKind::photoelectrons, ErrorCode::wrong_kind,
          "render_stack expects a photoelectron stack");
  params.validate();
  FrameStack out(photoelectrons.width(), photoelectrons.height(), photoelectrons.frames(),
                 FrameKind::counts);
  parallel_for(photoelectrons.frames(), threads, [&](std::size_t f) {
    Rng rng = make_stream(seed, f, purpose);
    render_frame(photoelectrons.frame(f), out.frame(f), params, rng, mode);
  });
  return out;
}

FrameStack render_dark_stack(std::size_t width, std::size_t height, std::size_t n_frames,
                             const EmccdParams& params, std::uint64_t seed, unsigned threads) {
  params.validate();
  FrameStack out(width, height, n_frames, FrameKind::counts);
  const std::vector<std::uint32_t> zeros(width * height, 0);
  parallel_for(n_frames, threads, [&](std::size_t f) {
    Rng rng = make_stream(seed, f, StreamPurpose::readout_dark);
    render_frame(zeros, out.frame(f), params, rng);
  });
  return out;
}

FrameStack apply_threshold(const FrameStack& counts, Threshold t) {
  require(counts.kind() == FrameKind::counts, ErrorCode::wrong_kind,
          "apply_threshold expects a counts stack");
  require(!std::isnan(t.value), ErrorCode::invalid_parameter, "threshold is NaN");
  FrameStack clicks(counts.width(), counts.height(), counts.frames(), FrameKind::clicks);
  auto in = counts.data();
  auto out = clicks.data();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = static_cast<double>(in[i]) > t.value ? 1 : 0;
  return clicks;
}

double click_level(Threshold t) {
  require(!std::isnan(t.value), ErrorCode::invalid_parameter, "threshold is NaN");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (t.value < 0.0) return -inf;
  if (t.value >= kMaxCount) return inf;
  return std::floor(t.value) + 0.5;
}

double predicted_noise_click_rate(Threshold t, const EmccdParams& params) {
  return noise_click_prob(Threshold{click_level(t)}, params);
}

double predicted_photon_click_rate(Threshold t, const EmccdParams& params) {
  return single_photon_tail(Threshold{click_level(t)}, params);
}

double predicted_efficiency(Threshold t, const EmccdParams& params) {
  return eta_of_threshold(Threshold{click_level(t)}, params);
}

}  // namespace emccd
