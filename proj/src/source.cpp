#include "emccd/source.hpp"

#include <array>
#include <cmath>
#include <random>

#include "emccd/error.hpp"
#include "emccd/parallel.hpp"
#include "emccd/region.hpp"

namespace emccd {

void SourceParams::validate() const {
  require(modes_per_pair >= 1, ErrorCode::invalid_parameter, "modes_per_pair must be >= 1");
  require(std::isfinite(mean_per_mode) && mean_per_mode >= 0.0, ErrorCode::invalid_parameter,
          "mean_per_mode must be finite and non-negative");
  require(eta1 >= 0.0 && eta1 <= 1.0 && eta2 >= 0.0 && eta2 <= 1.0, ErrorCode::invalid_parameter,
          "channel efficiencies must lie in [0, 1]");
  require(crosstalk >= 0.0 && crosstalk < 1.0, ErrorCode::invalid_parameter,
          "crosstalk must lie in [0, 1)");
  require(width > 0 && height > 0, ErrorCode::invalid_parameter, "grid must be non-empty");
}

double multimode_thermal_pmf(std::uint32_t k, int modes, double mean_per_mode) {
  require(modes >= 1 && mean_per_mode >= 0.0, ErrorCode::invalid_parameter,
          "invalid multimode thermal parameters");
  if (mean_per_mode == 0.0) return k == 0 ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  const double log_pmf = std::lgamma(modes + kd) - std::lgamma(kd + 1.0) - std::lgamma(modes) -
                         modes * std::log1p(mean_per_mode) +
                         kd * (std::log(mean_per_mode) - std::log1p(mean_per_mode));
  return std::exp(log_pmf);
}

namespace {

// Negative-binomial draws with the per-parameter constants hoisted out of
// the per-pixel loop.
class ThermalSampler {
 public:
  ThermalSampler(int modes, double mean_per_mode)
      : modes_(modes),
        mean_(mean_per_mode),
        q_(mean_per_mode / (1.0 + mean_per_mode)),
        p0_(std::exp(-modes * std::log1p(mean_per_mode))),
        inversion_(modes * mean_per_mode < 50.0 && p0_ > 1e-250),
        nb_(modes, 1.0 - q_) {}

  std::uint32_t operator()(Rng& rng) {
    if (mean_ <= 0.0) return 0;
    if (!inversion_) return nb_(rng);
    // Inversion along the recursion P(k+1) = P(k) (M + k) q / (k + 1).
    const double u = uniform01(rng);
    double p = p0_;
    double cdf = p;
    std::uint32_t k = 0;
    while (u > cdf && k < 100000) {
      p *= (modes_ + k) * q_ / (k + 1.0);
      ++k;
      cdf += p;
      if (p == 0.0) break;
    }
    return k;
  }

 private:
  int modes_;
  double mean_;
  double q_;
  double p0_;
  bool inversion_;
  std::negative_binomial_distribution<std::uint32_t> nb_;
};

}  // namespace

std::uint32_t sample_multimode_thermal(int modes, double mean_per_mode, Rng& rng) {
  return ThermalSampler(modes, mean_per_mode)(rng);
}

namespace {

constexpr std::array<std::array<int, 2>, 8> kNeighbours{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

std::uint32_t thin(std::uint32_t n, double keep, Rng& rng) {
  if (keep >= 1.0) return n;
  std::uint32_t kept = 0;
  for (std::uint32_t i = 0; i < n; ++i) kept += uniform01(rng) < keep ? 1u : 0u;
  return kept;
}

void fill_pair(const SourceParams& params, Rng& rng, std::span<std::uint32_t> beam1,
               std::span<std::uint32_t> beam2) {
  const std::size_t w = params.width;
  const std::size_t h = params.height;
  ThermalSampler sampler(params.modes_per_pair, params.mean_per_mode);
  for (std::size_t i = 0; i < w * h; ++i) {
    const std::uint32_t photons = sampler(rng);
    if (photons == 0) continue;
    beam1[i] += thin(photons, params.eta1, rng);
    const std::uint32_t n2 = thin(photons, params.eta2, rng);
    const std::size_t twin = conjugate_pixel(i, w, h);
    for (std::uint32_t k = 0; k < n2; ++k) {
      if (params.crosstalk > 0.0 && uniform01(rng) < params.crosstalk) {
        const auto& d = kNeighbours[static_cast<std::size_t>(uniform01(rng) * 8.0)];
        const long x = static_cast<long>(twin % w) + d[0];
        const long y = static_cast<long>(twin / w) + d[1];
        if (x < 0 || y < 0 || x >= static_cast<long>(w) || y >= static_cast<long>(h)) continue;
        beam2[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] += 1;
      } else {
        beam2[twin] += 1;
      }
    }
  }
}

}  // namespace

PhotoelectronFramePair generate_pair(const SourceParams& params, Rng& rng,
                                     std::uint64_t frame_index) {
  params.validate();
  PhotoelectronFramePair pair;
  pair.width = params.width;
  pair.height = params.height;
  pair.frame_index = frame_index;
  pair.beam1.assign(params.width * params.height, 0);
  pair.beam2.assign(params.width * params.height, 0);
  fill_pair(params, rng, pair.beam1, pair.beam2);
  return pair;
}

PhotoelectronStacks generate_stacks(const SourceParams& params, std::uint64_t seed,
                                    unsigned threads) {
  params.validate();
  PhotoelectronStacks stacks{
      FrameStack(params.width, params.height, params.frames, FrameKind::photoelectrons),
      FrameStack(params.width, params.height, params.frames, FrameKind::photoelectrons)};
  parallel_for(params.frames, threads, [&](std::size_t f) {
    Rng rng = make_stream(seed, f, StreamPurpose::source);
    fill_pair(params, rng, stacks.beam1.frame(f), stacks.beam2.frame(f));
  });
  return stacks;
}

PairMoments analytic_pair_stats(const SourceParams& params) {
  params.validate();
  const double m = params.modes_per_pair * params.mean_per_mode;
  const double mu = params.mean_per_mode;
  PairMoments out;
  out.mean1 = m * params.eta1;
  out.mean2 = m * params.eta2;
  out.var1 = m * params.eta1 * (1.0 + params.eta1 * mu);
  out.var2 = m * params.eta2 * (1.0 + params.eta2 * mu);
  out.covariance = params.geometric_factor() * params.eta1 * params.eta2 * m * (1.0 + mu);
  return out;
}

double theoretical_nrf(double eta, double alpha, double geometric_factor) {
  require(eta >= 0.0 && eta <= 1.0, ErrorCode::invalid_parameter, "eta must lie in [0, 1]");
  require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::invalid_parameter, "alpha must be > 0");
  require(geometric_factor > 0.0 && geometric_factor <= 1.0, ErrorCode::invalid_parameter,
          "geometric factor must lie in (0, 1]");
  return 0.5 * (1.0 + alpha) - eta * geometric_factor;
}

double theoretical_correlation(double eta, double geometric_factor, double n1_mean) {
  require(eta >= 0.0 && eta <= 1.0, ErrorCode::invalid_parameter, "eta must lie in [0, 1]");
  require(geometric_factor > 0.0 && geometric_factor <= 1.0, ErrorCode::invalid_parameter,
          "geometric factor must lie in (0, 1]");
  require(n1_mean >= 0.0 && std::isfinite(n1_mean), ErrorCode::invalid_parameter,
          "mean photon number must be non-negative");
  return eta * geometric_factor * n1_mean;
}

}  // namespace emccd
