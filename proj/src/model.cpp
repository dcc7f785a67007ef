#include "emccd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "emccd/error.hpp"

namespace emccd {

void EmccdParams::validate() const {
  const bool finite = std::isfinite(gain) && std::isfinite(cic_gain) && std::isfinite(cic_prob) &&
                      std::isfinite(bias) && std::isfinite(read_noise) &&
                      std::isfinite(analog_efficiency);
  require(finite, ErrorCode::invalid_parameter, "detector parameters must be finite");
  require(gain > 0.0, ErrorCode::invalid_parameter, "gain must be positive");
  require(cic_gain > 0.0, ErrorCode::invalid_parameter, "cic_gain must be positive");
  require(read_noise > 0.0, ErrorCode::invalid_parameter, "read_noise must be positive");
  require(cic_prob >= 0.0 && cic_prob < 1.0, ErrorCode::invalid_parameter,
          "cic_prob must lie in [0, 1)");
  require(analog_efficiency >= 0.0 && analog_efficiency <= 1.0, ErrorCode::invalid_parameter,
          "analog_efficiency must lie in [0, 1]");
}

namespace special {

double erfcx(double z) {
  if (std::isnan(z)) return z;
  if (z < 0.0) {
    const double z2 = z * z;
    const double err = std::fma(z, z, -z2);
    return 2.0 * std::exp(z2) * (1.0 + err) - erfcx(-z);
  }
  if (z < 25.0) {
    // exp(z^2) with the rounding error of z*z folded back in.
    const double z2 = z * z;
    const double err = std::fma(z, z, -z2);
    return std::exp(z2) * (1.0 + err) * std::erfc(z);
  }
  if (std::isinf(z)) return 0.0;
  // Continued fraction erfcx(z) = 1/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))).
  double tail = z;
  for (int k = 40; k >= 1; --k) tail = z + (0.5 * k) / tail;
  return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

double exp_erfc(double a, double z, double gaussian_exponent) {
  if (z <= 0.0) return std::exp(a) * std::erfc(z);
  return std::exp(gaussian_exponent) * erfcx(z);
}

}  // namespace special

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void check_gain(double gain) {
  require(std::isfinite(gain) && gain > 0.0, ErrorCode::invalid_parameter,
          "gain must be positive and finite");
}

void check_sigma(double sigma) {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorCode::invalid_parameter,
          "sigma must be positive and finite");
}

void check_threshold(Threshold t) {
  require(!std::isnan(t.value), ErrorCode::invalid_parameter, "threshold is NaN");
}

// Pieces shared by the EMG density and tail at level x.
struct EmgTerms {
  double a;       // sigma^2 / (2 g^2) - (x - mu) / g
  double z;       // (mu + sigma^2 / g - x) / (sigma sqrt 2)
  double gauss;   // -(x - mu)^2 / (2 sigma^2) == a - z^2
};

EmgTerms emg_terms(double x, double mu, double sigma, double gain) {
  const double d = x - mu;
  const double r = sigma / gain;
  return {0.5 * r * r - d / gain, (sigma * r - d) / (sigma * kSqrt2),
          -0.5 * (d / sigma) * (d / sigma)};
}

}  // namespace

EmGainDensity em_gain_pdf(double x, int n, double gain) {
  check_gain(gain);
  require(n >= 0, ErrorCode::invalid_parameter, "electron count must be non-negative");
  if (n == 0) return {0.0, true};
  if (std::isnan(x)) return {x, false};
  if (x < 0.0) return {0.0, false};
  if (x == 0.0) return {n == 1 ? 1.0 / gain : 0.0, false};
  const double log_density =
      (n - 1) * std::log(x) - x / gain - n * std::log(gain) - std::lgamma(static_cast<double>(n));
  return {std::exp(log_density), false};
}

double em_gain_tail(double x, int n, double gain) {
  check_gain(gain);
  require(n >= 1, ErrorCode::invalid_parameter, "tail needs at least one electron");
  if (x <= 0.0) return 1.0;
  // Poisson-sum form of the regularised upper incomplete gamma function.
  const double u = x / gain;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < n; ++k) {
    term *= u / k;
    sum += term;
  }
  return std::exp(-u) * sum;
}

double read_noise_pdf(double x, double mu, double sigma) {
  check_sigma(sigma);
  const double u = (x - mu) / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double read_noise_tail(double t, double mu, double sigma) {
  check_sigma(sigma);
  return 0.5 * std::erfc((t - mu) / (sigma * kSqrt2));
}

double emg_pdf(double x, double mu, double sigma, double gain) {
  check_sigma(sigma);
  check_gain(gain);
  const EmgTerms e = emg_terms(x, mu, sigma, gain);
  return special::exp_erfc(e.a, e.z, e.gauss) / (2.0 * gain);
}

double emg_tail(double t, double mu, double sigma, double gain) {
  check_sigma(sigma);
  check_gain(gain);
  const EmgTerms e = emg_terms(t, mu, sigma, gain);
  const double value = read_noise_tail(t, mu, sigma) + 0.5 * special::exp_erfc(e.a, e.z, e.gauss);
  return std::min(1.0, value);
}

double erlang_gauss_tail(double t, int n, double mu, double sigma, double gain) {
  check_sigma(sigma);
  check_gain(gain);
  require(n >= 1, ErrorCode::invalid_parameter, "tail needs at least one electron");
  const EmgTerms e = emg_terms(t, mu, sigma, gain);
  // Scaled partial moments E[W^k; W > 0] of W ~ Normal(m, sigma), times exp(a).
  const double m = t - mu - sigma * sigma / gain;
  const double moment0 = 0.5 * special::exp_erfc(e.a, e.z, e.gauss);
  const double density0 = std::exp(e.gauss) / std::sqrt(2.0 * std::numbers::pi);
  double sum = moment0;
  double prev2 = 0.0;
  double prev1 = moment0;
  double factor = 1.0;
  for (int k = 1; k < n; ++k) {
    const double moment = k == 1 ? m * prev1 + sigma * density0
                                 : m * prev1 + (k - 1) * sigma * sigma * prev2;
    factor *= gain * k;
    sum += moment / factor;
    prev2 = prev1;
    prev1 = moment;
  }
  return std::clamp(read_noise_tail(t, mu, sigma) + sum, 0.0, 1.0);
}

double noise_pdf(double x, const EmccdParams& params) {
  params.validate();
  return (1.0 - params.cic_prob) * read_noise_pdf(x, params.bias, params.read_noise) +
         params.cic_prob * emg_pdf(x, params.bias, params.read_noise, params.cic_gain);
}

double noise_click_prob(Threshold t, const EmccdParams& params) {
  params.validate();
  check_threshold(t);
  const double value =
      (1.0 - params.cic_prob) * read_noise_tail(t.value, params.bias, params.read_noise) +
      params.cic_prob * emg_tail(t.value, params.bias, params.read_noise, params.cic_gain);
  return std::clamp(value, 0.0, 1.0);
}

double single_photon_response_pdf(double x, const EmccdParams& params) {
  params.validate();
  return emg_pdf(x, params.bias, params.read_noise, params.gain);
}

double single_photon_tail(Threshold t, const EmccdParams& params) {
  params.validate();
  check_threshold(t);
  return emg_tail(t.value, params.bias, params.read_noise, params.gain);
}

double eta_of_threshold(Threshold t, const EmccdParams& params) {
  return params.analog_efficiency * single_photon_tail(t, params);
}

double click_prob(Threshold t, double photon_prob, const EmccdParams& params) {
  require(photon_prob >= 0.0 && photon_prob <= 1.0, ErrorCode::invalid_parameter,
          "photon probability must lie in [0, 1]");
  const double value =
      params.analog_efficiency * photon_prob * single_photon_tail(t, params) +
      noise_click_prob(t, params);
  return std::clamp(value, 0.0, 1.0);
}

double sample_em_output(int n, double gain, Rng& rng) {
  check_gain(gain);
  require(n >= 0, ErrorCode::invalid_parameter, "electron count must be non-negative");
  if (n == 0) return 0.0;
  if (n == 1) return -gain * std::log1p(-uniform01(rng));
  std::gamma_distribution<double> erlang(static_cast<double>(n), gain);
  return erlang(rng);
}

}  // namespace emccd
