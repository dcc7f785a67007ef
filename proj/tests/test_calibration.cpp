#include <doctest.h>

#include <cmath>
#include <vector>

#include "check_error.hpp"
#include "emccd/calibration.hpp"
#include "emccd/model.hpp"
#include "emccd/readout.hpp"
#include "emccd/region.hpp"
#include "emccd/source.hpp"

using namespace emccd;

namespace {

struct Beams {
  FrameStack beam1;
  FrameStack beam2;
};

Beams simulate(const SourceParams& src, const EmccdParams& det, std::uint64_t seed, ReadoutMode mode) {
  const auto pe = generate_stacks(src, seed, 2);
  return {render_stack(pe.beam1, det, seed, StreamPurpose::readout_beam1, mode, 2),
          render_stack(pe.beam2, det, seed, StreamPurpose::readout_beam2, mode, 2)};
}

}  // namespace

TEST_CASE("analog calibration recovers the efficiency") {
  SourceParams src;
  src.width = 64;
  src.height = 64;
  src.frames = 300;
  src.modes_per_pair = 1000;
  src.mean_per_mode = 0.00926;
  src.eta1 = 0.54;
  src.eta2 = 0.54;
  const EmccdParams det;
  const auto beams = simulate(src, det, 3, ReadoutMode::conventional);
  const auto regions = tiled_region_pairs({0, 0, 64, 32}, 16, 16, 64, 64);
  const auto cal = estimate_eta_analog(beams.beam1, beams.beam2, regions, det);
  INFO("eta0 = " << cal.eta0.value << " +- " << cal.eta0.uncertainty);
  CHECK(std::abs(cal.eta0.value - 0.54) < 4.0 * cal.eta0.uncertainty);
  CHECK(cal.eta0.uncertainty < 0.05);
  CHECK(std::abs(cal.eta0_from_correlation.value - 0.54) < 4.0 * cal.eta0_from_correlation.uncertainty);
  CHECK(cal.stats.alpha == doctest::Approx(1.0).epsilon(0.02));
  const double s = det.read_noise / det.gain;
  CHECK(cal.electronic_variance ==
        doctest::Approx(s * s + det.cic_prob * (1 - det.cic_prob) + 1.0 / (12 * det.gain * det.gain)));

  AnalogOptions opt;
  opt.gain_uncertainty = 5.0;
  const auto wider = estimate_eta_analog(beams.beam1, beams.beam2, regions, det, opt);
  CHECK(wider.eta0.value == cal.eta0.value);
  CHECK(wider.eta0.uncertainty > cal.eta0.uncertainty);
}

TEST_CASE("analog calibration input checks") {
  const EmccdParams det;
  FrameStack a(8, 8, 4, FrameKind::counts), b(8, 8, 5, FrameKind::counts);
  const auto regions = tiled_region_pairs({0, 0, 8, 4}, 4, 4, 8, 8);
  CHECK_ERROR_CODE(estimate_eta_analog(a, b, regions, det), ErrorCode::invalid_parameter);
  FrameStack c(8, 8, 4, FrameKind::clicks);
  CHECK_ERROR_CODE(estimate_eta_analog(a, c, regions, det), ErrorCode::wrong_kind);
  CHECK_ERROR_CODE(estimate_eta_analog(a, a, {}, det), ErrorCode::empty_region);
  AnalogOptions bad;
  bad.geometric_factor = 0.0;
  CHECK_ERROR_CODE(estimate_eta_analog(a, a, regions, det, bad), ErrorCode::invalid_parameter);
  // All-zero counts sit below the bias: no signal.
  CHECK_ERROR_CODE(estimate_eta_analog(a, a, regions, det), ErrorCode::degenerate_input);
}

TEST_CASE("counting calibration follows eta0 times the single-photon tail") {
  SourceParams src;
  src.width = 100;
  src.height = 100;
  src.frames = 400;
  src.modes_per_pair = 50;
  src.mean_per_mode = 0.0004;
  src.eta1 = 1.0;
  src.eta2 = 1.0;
  EmccdParams det;
  det.analog_efficiency = 0.54;
  // Efficiency enters through the source so the readout sees whole photoelectrons.
  src.eta1 = src.eta2 = det.analog_efficiency;
  const auto beams = simulate(src, det, 8, ReadoutMode::electron_multiplying);
  const auto dark = render_dark_stack(100, 100, 40, det, 8);
  const auto regions = tiled_region_pairs({0, 0, 100, 50}, 10, 10, 100, 100);
  const std::vector<Threshold> grid{{600.0}, {700.0}};
  CountingOptions opt;
  opt.threads = 2;
  const auto curve = estimate_eta_counting(beams.beam1, beams.beam2, dark, regions, grid, det, opt);
  REQUIRE(curve.points.size() == 2);
  for (const auto& pt : curve.points) {
    INFO("T = " << pt.threshold << " eta " << pt.eta_measured << " +- " << pt.eta_uncertainty
                << " pred " << pt.eta_predicted);
    CHECK(std::abs(pt.eta_measured - pt.eta_predicted) < 4.0 * pt.eta_uncertainty);
    CHECK(std::abs(pt.noise_measured - pt.noise_predicted) < 4.0 * pt.noise_uncertainty);
    CHECK_FALSE(pt.below_validity);
    CHECK(pt.eta_predicted == predicted_efficiency({pt.threshold}, det));
  }
  opt.threads = 1;
  const auto again = estimate_eta_counting(beams.beam1, beams.beam2, dark, regions, grid, det, opt);
  CHECK(again.points[0].eta_measured == curve.points[0].eta_measured);
  CHECK(again.points[1].eta_uncertainty == curve.points[1].eta_uncertainty);

  const FrameStack no_dark(100, 100, 0, FrameKind::counts);
  const auto nd = estimate_eta_counting(beams.beam1, beams.beam2, no_dark, regions, {{550.0}}, det);
  CHECK(std::isnan(nd.points[0].noise_measured));
  CHECK(nd.points[0].below_validity);
  CHECK(std::isfinite(nd.points[0].eta_measured));

  std::vector<Threshold> too_many(300, Threshold{600.0});
  CHECK_ERROR_CODE(estimate_eta_counting(beams.beam1, beams.beam2, dark, regions, too_many, det),
                   ErrorCode::degenerate_input);
  CHECK_ERROR_CODE(estimate_eta_counting(beams.beam1, beams.beam2, dark, regions, {}, det),
                   ErrorCode::invalid_parameter);
}

TEST_CASE("thresholds above every count give NaN instead of throwing") {
  FrameStack a(4, 4, 10, FrameKind::counts);
  for (auto& v : a.data()) v = 500;
  const FrameStack dark(4, 4, 0, FrameKind::counts);
  const auto regions = tiled_region_pairs({0, 0, 4, 2}, 2, 2, 4, 4);
  const auto curve = estimate_eta_counting(a, a, dark, regions, {{5000.0}}, EmccdParams{});
  CHECK(std::isnan(curve.points[0].eta_measured));
  CHECK(std::isnan(curve.points[0].eta_uncertainty));
}

TEST_CASE("prediction uncertainty propagation") {
  const EmccdParams p;
  CHECK(predicted_noise_uncertainty({600.0}, p, {}) == 0.0);
  EmccdParamErrors e;
  e.read_noise = 0.1;
  const double h = 0.1;
  EmccdParams up = p, down = p;
  up.read_noise += h;
  down.read_noise -= h;
  const double expected =
      std::abs(predicted_noise_click_rate({600.0}, up) - predicted_noise_click_rate({600.0}, down)) / 2.0;
  CHECK(predicted_noise_uncertainty({600.0}, p, e) == doctest::Approx(expected).epsilon(1e-12));
  // Contributions add in quadrature.
  EmccdParamErrors g;
  g.gain = 1.0;
  EmccdParamErrors both = e;
  both.gain = 1.0;
  const double a = predicted_efficiency_uncertainty({650.0}, p, e);
  const double b = predicted_efficiency_uncertainty({650.0}, p, g);
  CHECK(predicted_efficiency_uncertainty({650.0}, p, both) == doctest::Approx(std::hypot(a, b)));
  // A spurious-charge error larger than the value falls back to a one-sided step.
  EmccdParamErrors big;
  big.cic_prob = 0.01;
  CHECK(std::isfinite(predicted_noise_uncertainty({600.0}, p, big)));
}
