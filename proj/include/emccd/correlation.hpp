#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "emccd/frame_stack.hpp"
#include "emccd/params.hpp"

// Twin-beam correlation statistics of region sums: balance ratio, noise
// reduction factor and covariance, plus click bookkeeping for the counting
// regime.

namespace emccd {

struct PairStatistics {
  double n1_mean = 0.0;
  double n2_mean = 0.0;
  double alpha = 0.0;                ///< n1_mean / n2_mean
  double difference_variance = 0.0;  ///< unbiased Var(N1 - alpha N2)
  double zeta = 0.0;                 ///< difference_variance / (n1_mean + alpha n2_mean)
  double covariance = 0.0;           ///< unbiased Cov(N1, N2)
  std::size_t n_samples = 0;
};

/// Running power sums of paired samples. Sums of disjoint sample sets add,
/// which makes block resampling cheap.
struct PairSums {
  double count = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s11 = 0.0;
  double s22 = 0.0;
  double s12 = 0.0;

  void add(double n1, double n2) {
    count += 1.0;
    s1 += n1;
    s2 += n2;
    s11 += n1 * n1;
    s22 += n2 * n2;
    s12 += n1 * n2;
  }
  PairSums& operator+=(const PairSums& o);
  PairSums& operator-=(const PairSums& o);
};

/// Statistics from sums of the shifted samples (n1 - centre1, n2 - centre2);
/// shifting by a typical value keeps the sums well conditioned. Throws
/// degenerate-input when mean(N2) is 0 or there are fewer than 2 samples.
PairStatistics pair_statistics(const PairSums& sums, double centre1 = 0.0, double centre2 = 0.0);
PairStatistics pair_statistics(std::span<const double> n1, std::span<const double> n2);

/// Per-frame sums of the pixel values inside `mask`.
std::vector<double> region_sums(const FrameStack& stack, const std::vector<std::size_t>& mask);

struct ClickCounts {
  double n_click = 0.0;  ///< mean clicks in the region per frame
  double n_noise = 0.0;  ///< expected noise clicks in the region per frame
  double n_true = 0.0;   ///< n_click - n_noise, not clamped
};

/// Click bookkeeping for one region of a click stack thresholded at T. The
/// noise expectation comes from the model with the given (fitted) parameters.
ClickCounts count_region_clicks(const FrameStack& clicks, const std::vector<std::size_t>& mask,
                                Threshold t, const EmccdParams& params);

}  // namespace emccd
