#pragma once

namespace emccd {

/// Detector parameters of the EMCCD readout chain. Used both as simulation
/// truth and as the output of the histogram fits.
struct EmccdParams {
  double gain = 147.0;            ///< mean EM gain, counts per photoelectron
  double cic_gain = 141.0;        ///< mean gain seen by a clock-induced (spurious) electron
  double cic_prob = 0.0044;       ///< spurious-event probability per pixel per frame
  double bias = 507.9;            ///< read-out bias level, counts
  double read_noise = 24.88;      ///< read-noise standard deviation, counts
  double analog_efficiency = 0.54;

  /// Throws Error(invalid_parameter) when any invariant is broken.
  void validate() const;
};

/// Discrimination level in counts. A pixel clicks when its counts exceed it.
struct Threshold {
  double value = 0.0;
};

}  // namespace emccd
