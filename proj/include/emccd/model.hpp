#pragma once

#include "emccd/params.hpp"
#include "emccd/rng.hpp"

// Closed-form probability model of the EMCCD readout chain: EM register
// (Erlang law), Gaussian read noise, clock-induced charge, and the
// single-photon response obtained by convolving them.

namespace emccd {

/// Output of the EM register density. For zero input electrons the law is a
/// point mass at x = 0, which has no density value; `point_mass_at_zero` is
/// set and `density` is 0.
struct EmGainDensity {
  double density = 0.0;
  bool point_mass_at_zero = false;
};

/// Erlang(n, gain) density of the register output for n input electrons.
EmGainDensity em_gain_pdf(double x, int n, double gain);

/// Survival function P(X >= x) of the register output for n >= 1 electrons.
double em_gain_tail(double x, int n, double gain);

double read_noise_pdf(double x, double mu, double sigma);

/// P(X >= t) for X ~ Normal(mu, sigma).
double read_noise_tail(double t, double mu, double sigma);

/// Density of Normal(mu, sigma) + Exponential(gain), i.e. an exponentially
/// modified Gaussian. Evaluated through the scaled complementary error
/// function so that no intermediate exponential overflows.
double emg_pdf(double x, double mu, double sigma, double gain);

/// P(X >= t) for the same exponentially modified Gaussian.
double emg_tail(double t, double mu, double sigma, double gain);

/// P(X >= t) for X = Normal(mu, sigma) + Erlang(n, gain). Exact for every n,
/// numerically reliable for small n (the register output of a few electrons).
double erlang_gauss_tail(double t, int n, double mu, double sigma, double gain);

/// Dark-frame density: read noise, plus with probability cic_prob one
/// spurious electron amplified with mean gain cic_gain.
double noise_pdf(double x, const EmccdParams& params);

/// Probability that a dark pixel exceeds T.
double noise_click_prob(Threshold t, const EmccdParams& params);

/// Counts produced by exactly one photoelectron, read noise included.
double single_photon_response_pdf(double x, const EmccdParams& params);

/// P1(x >= T).
double single_photon_tail(Threshold t, const EmccdParams& params);

/// Threshold efficiency: analog efficiency times the single-photon tail.
double eta_of_threshold(Threshold t, const EmccdParams& params);

/// Click probability in the low-illumination approximation, clamped to [0, 1].
/// Meaningful for thresholds well above the read-noise core (T >= mu + 2 sigma).
double click_prob(Threshold t, double photon_prob, const EmccdParams& params);

/// Draw of the register output for n input electrons. Returns exactly 0 for n = 0.
double sample_em_output(int n, double gain, Rng& rng);

namespace special {

/// erfcx(z) = exp(z^2) erfc(z).
double erfcx(double z);

/// exp(a) * erfc(z) evaluated without overflow when a and z^2 are both large.
/// `gaussian_exponent` must equal a - z^2 (used for z > 0).
double exp_erfc(double a, double z, double gaussian_exponent);

}  // namespace special

}  // namespace emccd
