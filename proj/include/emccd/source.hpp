#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "emccd/frame_stack.hpp"
#include "emccd/rng.hpp"

// Twin-beam (multimode squeezed vacuum) photoelectron generator and the
// analytic statistics it should reproduce.

namespace emccd {

struct SourceParams {
  int modes_per_pair = 50;       ///< spatio-temporal modes per conjugate pixel pair
  double mean_per_mode = 0.002;  ///< mean photons per mode
  double eta1 = 0.54;            ///< detection efficiency of beam 1
  double eta2 = 0.54;            ///< detection efficiency of beam 2
  double crosstalk = 0.0;        ///< probability a beam-2 photon lands off its twin pixel
  std::size_t width = 400;
  std::size_t height = 400;
  std::size_t frames = 35;

  /// Fraction of conjugate photons collected by the paired pixel.
  double geometric_factor() const { return 1.0 - crosstalk; }
  /// Expected incident photons per pixel per frame.
  double photons_per_pixel() const { return modes_per_pair * mean_per_mode; }

  void validate() const;
};

/// Photoelectron maps of both beams for one frame. beam2[conjugate_pixel(i)]
/// holds the twins of beam1[i].
struct PhotoelectronFramePair {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint64_t frame_index = 0;
  std::vector<std::uint32_t> beam1;
  std::vector<std::uint32_t> beam2;
};

/// Sum of `modes` i.i.d. geometric (single-mode thermal) photon numbers with
/// the given mean, i.e. a negative binomial draw.
std::uint32_t sample_multimode_thermal(int modes, double mean_per_mode, Rng& rng);

/// P(N = k) for the multimode thermal law.
double multimode_thermal_pmf(std::uint32_t k, int modes, double mean_per_mode);

PhotoelectronFramePair generate_pair(const SourceParams& params, Rng& rng,
                                     std::uint64_t frame_index = 0);

/// Per-frame photoelectron stacks of both beams, one independent random
/// stream per frame derived from `seed`.
struct PhotoelectronStacks {
  FrameStack beam1;
  FrameStack beam2;
};
PhotoelectronStacks generate_stacks(const SourceParams& params, std::uint64_t seed,
                                    unsigned threads = 1);

struct PairMoments {
  double mean1 = 0.0;
  double mean2 = 0.0;
  double var1 = 0.0;
  double var2 = 0.0;
  double covariance = 0.0;
};

/// Per-pixel-pair moments of the detected twin-beam photon numbers.
PairMoments analytic_pair_stats(const SourceParams& params);

/// Noise reduction factor expected for efficiency eta, balance alpha and
/// geometric factor A: (1 + alpha) / 2 - eta A.
double theoretical_nrf(double eta, double alpha, double geometric_factor);

/// Covariance expected between the two beams: eta A <N1>.
double theoretical_correlation(double eta, double geometric_factor, double n1_mean);

}  // namespace emccd
