#pragma once

#include <optional>

#include "emccd/histogram.hpp"

// Recovery of the detector parameters from count histograms: read noise from
// the Gaussian core of a dark histogram, spurious charge from its exponential
// tail, EM gain from the tail of a dimly illuminated histogram.

namespace emccd {

struct Estimate {
  double value = 0.0;
  double uncertainty = 0.0;  ///< one standard deviation
};

/// Fit range in counts; bins whose centre lies inside are used.
struct CountWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// A spurious-charge component held fixed while fitting something else.
struct SpuriousCharge {
  double prob = 0.0;
  double gain = 1.0;
};

struct ReadNoiseFit {
  Estimate mu;
  Estimate sigma;
  Estimate entries;  ///< fitted number of pixels in the full distribution
  CountWindow window;
  double reduced_chi2 = 0.0;
  int iterations = 0;
};

struct CicFit {
  Estimate cic_prob;
  Estimate cic_gain;
  CountWindow window;
  double reduced_chi2 = 0.0;
  int iterations = 0;
};

struct GainFit {
  Estimate gain;
  Estimate mean_photoelectrons;  ///< mean photoelectrons per pixel
  CountWindow window;
  double reduced_chi2 = 0.0;
  int iterations = 0;
};

struct DarkFit {
  ReadNoiseFit read_noise;
  CicFit cic;
};

/// Half the interquartile range divided by 0.6745 (sigma for a Gaussian).
double robust_width(const Histogram& hist);

/// [mode - 3 s, mode + 2 s] with s = robust_width.
CountWindow default_read_noise_window(const Histogram& hist);

/// Weighted least squares (variance max(count, 1)) of bin-integrated
/// Gaussian counts. A known spurious-charge component is modelled alongside
/// the Gaussian when supplied. Throws fit-failure with fewer than 5 bins in
/// the window or without convergence in 200 iterations.
ReadNoiseFit fit_read_noise(const Histogram& hist, std::optional<CountWindow> window = {},
                            SpuriousCharge known_cic = {});

/// Spurious-charge tail fit on [mu + 4 sigma, end] by default. Starts from a
/// log-linear regression of the nonzero bins and refines it by Poisson
/// maximum likelihood of the bin-integrated dark model.
CicFit fit_cic(const Histogram& hist, double mu, double sigma,
               std::optional<CountWindow> window = {});

/// EM-gain fit on the tail of an illuminated histogram, [mu + 4 sigma, end]
/// by default. Pixels carry a Poisson number of photoelectrons, so pixels
/// with two or more electrons are part of the model instead of a bias.
GainFit fit_gain(const Histogram& hist, double mu, double sigma,
                 std::optional<CountWindow> window = {}, SpuriousCharge known_cic = {});

/// Alternating read-noise / spurious-charge fits on a dark histogram; each
/// refinement refits the Gaussian core with the current spurious-charge
/// component included.
DarkFit fit_dark(const Histogram& hist, int refinements = 2);

}  // namespace emccd
