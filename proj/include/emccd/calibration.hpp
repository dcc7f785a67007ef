#pragma once

#include <cstddef>
#include <vector>

#include "emccd/correlation.hpp"
#include "emccd/fit.hpp"
#include "emccd/frame_stack.hpp"
#include "emccd/params.hpp"
#include "emccd/region.hpp"

// Absolute efficiency from twin-beam correlations: analog regime (counts
// converted to photoelectrons) and counting regime (thresholded clicks as a
// function of T).

namespace emccd {

/// One-sigma uncertainties of fitted detector parameters.
struct EmccdParamErrors {
  double gain = 0.0;
  double cic_gain = 0.0;
  double cic_prob = 0.0;
  double bias = 0.0;
  double read_noise = 0.0;
  double analog_efficiency = 0.0;
};

struct AnalogOptions {
  double geometric_factor = 1.0;  ///< A, supplied
  std::size_t blocks = 20;        ///< frame blocks for the jackknife
  double gain_uncertainty = 0.0;  ///< propagated into the eta0 uncertainty
};

struct AnalogCalibration {
  Estimate eta0;                   ///< from the noise reduction factor
  Estimate eta0_from_correlation;  ///< C / (A <N1>) cross-check
  PairStatistics stats;            ///< raw statistics of the region sums
  double zeta = 0.0;               ///< after removing the electronic variance
  double electronic_variance = 0.0;  ///< per pixel, in photoelectrons^2
  bool consistent = true;  ///< the two estimates agree within 3 combined sigma
};

/// Analog calibration on counts stacks read out without electron
/// multiplication (each electron adds `gain` counts). Pixel values become
/// photoelectron equivalents (x - bias) / gain - cic_prob; the variance added
/// by read noise, spurious charge and ADC rounding is removed from the
/// difference variance. Every (frame, region pair) is one sample.
AnalogCalibration estimate_eta_analog(const FrameStack& beam1, const FrameStack& beam2,
                                      const std::vector<RegionPair>& regions,
                                      const EmccdParams& params, const AnalogOptions& options = {});

struct CurvePoint {
  double threshold = 0.0;
  double eta_measured = 0.0;
  double eta_uncertainty = 0.0;
  double eta_predicted = 0.0;
  double noise_measured = 0.0;
  double noise_uncertainty = 0.0;
  double noise_predicted = 0.0;
  double eta_pred_uncertainty = 0.0;    ///< from detector-parameter errors
  double noise_pred_uncertainty = 0.0;  ///< from detector-parameter errors
  double eta_scale_uncertainty = 0.0;   ///< relative, common to all points (eta0 error)
  bool below_validity = false;          ///< T < bias + 2 read_noise
  double eta_from_correlation = 0.0;    ///< C-based cross-check
};

struct CalibrationCurve {
  std::vector<CurvePoint> points;
};

struct CountingOptions {
  double geometric_factor = 1.0;
  std::size_t blocks = 20;
  /// Give each threshold its own contiguous share of the frames so the curve
  /// points are statistically independent.
  bool disjoint_frames = true;
  EmccdParamErrors param_errors;
  unsigned threads = 1;
};

/// Counting-regime curve. For every T both beams are thresholded, the
/// expected noise clicks are removed from each region sum and the result is
/// rescaled by 1 / (1 - noise rate) so that a noise click masking a photon
/// click is accounted for. The remaining noise variance is removed from the
/// difference variance before inverting the noise reduction factor.
/// Measured noise rates come from `dark` (may hold zero frames; the column is
/// then NaN). Points where the estimate degenerates carry NaN.
CalibrationCurve estimate_eta_counting(const FrameStack& beam1, const FrameStack& beam2,
                                       const FrameStack& dark,
                                       const std::vector<RegionPair>& regions,
                                       const std::vector<Threshold>& thresholds,
                                       const EmccdParams& params,
                                       const CountingOptions& options = {});

/// Noise-rate uncertainty from parameter errors.
double predicted_noise_uncertainty(Threshold t, const EmccdParams& params,
                                   const EmccdParamErrors& errors);
/// Uncertainty of analog_efficiency * P1 tail from the gain, bias and read
/// noise errors (analog efficiency excluded).
double predicted_efficiency_uncertainty(Threshold t, const EmccdParams& params,
                                        const EmccdParamErrors& errors);

}  // namespace emccd
