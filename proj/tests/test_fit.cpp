#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "check_error.hpp"
#include "emccd/fit.hpp"
#include "emccd/histogram.hpp"
#include "emccd/readout.hpp"

using namespace emccd;

namespace {

std::vector<std::uint32_t> gaussian_counts(double mu, double sigma, std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, StreamPurpose::test);
  std::normal_distribution<double> dist(mu, sigma);
  std::vector<std::uint32_t> v(n);
  for (auto& x : v) x = static_cast<std::uint32_t>(std::nearbyint(dist(rng)));
  return v;
}

// Illuminated frame: Poisson photoelectrons with the given mean per pixel.
std::vector<std::uint32_t> illuminated_counts(const EmccdParams& p, double mean, std::size_t n,
                                              std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, StreamPurpose::test);
  std::poisson_distribution<std::uint32_t> poisson(mean);
  std::vector<std::uint32_t> electrons(n);
  for (auto& e : electrons) e = poisson(rng);
  return render_frame(electrons, p, rng);
}

}  // namespace

TEST_CASE("robust width and default window on a Gaussian") {
  const auto h = build_histogram(gaussian_counts(500.0, 20.0, 200'000, 1));
  CHECK(robust_width(h) == doctest::Approx(20.0).epsilon(0.02));
  const auto w = default_read_noise_window(h);
  CHECK(w.lo == doctest::Approx(440.0).epsilon(0.01));
  CHECK(w.hi == doctest::Approx(540.0).epsilon(0.01));
}

TEST_CASE("read-noise fit recovers a pure Gaussian") {
  const auto h = build_histogram(gaussian_counts(507.9, 24.88, 400'000, 2));
  const auto fit = fit_read_noise(h);
  CHECK(std::abs(fit.mu.value - 507.9) < 4.0 * fit.mu.uncertainty);
  CHECK(std::abs(fit.sigma.value - 24.88) < 4.0 * fit.sigma.uncertainty);
  CHECK(fit.mu.uncertainty == doctest::Approx(24.88 / std::sqrt(400'000.0)).epsilon(0.3));
  CHECK(fit.reduced_chi2 < 2.0);
  CHECK(fit.entries.value == doctest::Approx(400'000.0).epsilon(0.01));
}

TEST_CASE("read-noise fit needs enough bins") {
  const auto h = build_histogram(gaussian_counts(500.0, 20.0, 10'000, 3));
  CHECK_ERROR_CODE(fit_read_noise(h, CountWindow{499.0, 502.0}), ErrorCode::fit_failure);
  const std::vector<std::uint32_t> flat(100, 7);
  CHECK_ERROR_CODE(fit_read_noise(build_histogram(flat)), ErrorCode::fit_failure);
}

TEST_CASE("dark fit recovers read noise and spurious charge") {
  EmccdParams p;
  const auto dark = render_dark_stack(300, 300, 20, p, 21, 1);
  const auto fit = fit_dark(build_histogram(dark));
  INFO("mu " << fit.read_noise.mu.value << " sigma " << fit.read_noise.sigma.value << " p_sc "
             << fit.cic.cic_prob.value << " g_sc " << fit.cic.cic_gain.value);
  CHECK(std::abs(fit.read_noise.mu.value - p.bias) < 0.5);
  CHECK(std::abs(fit.read_noise.sigma.value / p.read_noise - 1.0) < 0.005);
  CHECK(std::abs(fit.cic.cic_prob.value - p.cic_prob) < 4.0 * fit.cic.cic_prob.uncertainty);
  CHECK(std::abs(fit.cic.cic_gain.value - p.cic_gain) < 4.0 * fit.cic.cic_gain.uncertainty);
  CHECK(fit.cic.cic_prob.uncertainty < 0.05 * p.cic_prob);
}

TEST_CASE("spurious-charge fit rejects an empty tail") {
  const auto h = build_histogram(gaussian_counts(500.0, 20.0, 50'000, 4));
  CHECK_ERROR_CODE(fit_cic(h, 500.0, 20.0), ErrorCode::fit_failure);
}

TEST_CASE("gain fit recovers the EM gain from an illuminated histogram") {
  EmccdParams p;
  const auto counts = illuminated_counts(p, 0.1, 400'000, 5);
  const auto h = build_histogram(counts);
  const auto fit = fit_gain(h, p.bias, p.read_noise, {}, {p.cic_prob, p.cic_gain});
  INFO("g = " << fit.gain.value << " +- " << fit.gain.uncertainty);
  CHECK(std::abs(fit.gain.value - p.gain) < 4.0 * fit.gain.uncertainty);
  CHECK(fit.gain.uncertainty < 0.02 * p.gain);
  CHECK(std::abs(fit.mean_photoelectrons.value - 0.1) < 4.0 * fit.mean_photoelectrons.uncertainty);
}

TEST_CASE("gain fit handles multi-electron pixels without bias") {
  EmccdParams p;
  p.cic_prob = 0.0;
  const auto counts = illuminated_counts(p, 0.6, 200'000, 6);
  const auto fit = fit_gain(build_histogram(counts), p.bias, p.read_noise);
  CHECK(std::abs(fit.gain.value - p.gain) < 4.0 * fit.gain.uncertainty);
  CHECK(std::abs(fit.mean_photoelectrons.value - 0.6) < 4.0 * fit.mean_photoelectrons.uncertainty);
}
