#include <doctest.h>

#include <cmath>
#include <vector>

#include "check_error.hpp"
#include "emccd/region.hpp"
#include "emccd/source.hpp"
#include "oracles.hpp"

using namespace emccd;

TEST_CASE("conjugate pixel is a point reflection and an involution") {
  CHECK(conjugate_pixel(0, 4, 3) == 11);
  CHECK(conjugate_pixel(5, 4, 3) == 6);
  for (std::size_t i = 0; i < 35; ++i) CHECK(conjugate_pixel(conjugate_pixel(i, 7, 5), 7, 5) == i);
  // Odd sizes keep the centre pixel fixed.
  CHECK(conjugate_pixel(17, 7, 5) == 17);
}

TEST_CASE("region helpers") {
  const auto px = rect_pixels({1, 2, 2, 2}, 5, 5);
  CHECK(px == std::vector<std::size_t>{11, 12, 16, 17});
  CHECK_ERROR_CODE(rect_pixels({0, 0, 0, 3}, 5, 5), ErrorCode::empty_region);
  CHECK_ERROR_CODE(rect_pixels({4, 0, 2, 1}, 5, 5), ErrorCode::invalid_parameter);

  const auto pair = conjugate_region_pair({0, 0, 2, 1}, 4, 4);
  CHECK(pair.beam2 == std::vector<std::size_t>{15, 14});

  const auto tiles = tiled_region_pairs({0, 0, 10, 10}, 3, 3, 10, 10);
  CHECK(tiles.size() == 9);
  CHECK_ERROR_CODE(tiled_region_pairs({0, 0, 2, 2}, 3, 3, 10, 10), ErrorCode::empty_region);

  const auto lattice = sublattice_region_pair({1, 1, 4, 4}, 2, 8, 8);
  CHECK(lattice.beam1 == std::vector<std::size_t>{9, 11, 25, 27});

  const Rect c = centered_rect(4, 2, 10, 8);
  CHECK(c.x == 3);
  CHECK(c.y == 3);
  CHECK_ERROR_CODE(validate_region_pairs({}, 10), ErrorCode::empty_region);
  CHECK_ERROR_CODE(validate_region_pairs({RegionPair{{3}, {12}}}, 10), ErrorCode::invalid_parameter);
}

TEST_CASE("multimode thermal pmf") {
  double total = 0.0, mean = 0.0;
  for (std::uint32_t k = 0; k < 200; ++k) {
    const double p = multimode_thermal_pmf(k, 50, 0.02);
    total += p;
    mean += k * p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
  // One mode is Bose-Einstein.
  CHECK(multimode_thermal_pmf(3, 1, 0.5) == doctest::Approx(std::pow(0.5, 3) / std::pow(1.5, 4)));
  CHECK(multimode_thermal_pmf(0, 10, 0.0) == 1.0);
  CHECK(multimode_thermal_pmf(1, 10, 0.0) == 0.0);
}

TEST_CASE("thermal sampler matches the pmf (chi-square)") {
  struct Case {
    int modes;
    double mu;
  };
  for (const Case c : {Case{50, 0.002}, Case{1, 0.3}, Case{1000, 0.00926}, Case{20, 5.0}}) {
    Rng rng = make_stream(31, static_cast<std::uint64_t>(c.modes), StreamPurpose::test);
    const int n = 200'000;
    const std::size_t kmax = 400;
    std::vector<double> observed(kmax + 1, 0.0), prob(kmax + 1, 0.0);
    for (int i = 0; i < n; ++i) observed[std::min<std::size_t>(sample_multimode_thermal(c.modes, c.mu, rng), kmax)] += 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < kmax; ++k) acc += prob[k] = multimode_thermal_pmf(static_cast<std::uint32_t>(k), c.modes, c.mu);
    prob[kmax] = std::max(0.0, 1.0 - acc);
    const auto r = oracle::chi_square_gof(observed, prob, n);
    INFO("M = " << c.modes << " mu = " << c.mu << " chi2 = " << r.chi2 << " dof = " << r.dof);
    CHECK(r.p_value > 0.001);
  }
}

TEST_CASE("generated pair moments match the analytic values") {
  SourceParams p;
  p.width = 64;
  p.height = 64;
  p.frames = 400;
  p.modes_per_pair = 100;
  p.mean_per_mode = 0.01;
  p.eta1 = 0.6;
  p.eta2 = 0.4;
  p.crosstalk = 0.0;
  const auto stacks = generate_stacks(p, 5, 2);
  const auto expected = analytic_pair_stats(p);
  const double n = static_cast<double>(p.frames * p.width * p.height);
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
  for (std::size_t f = 0; f < p.frames; ++f) {
    const auto b1 = stacks.beam1.frame(f);
    const auto b2 = stacks.beam2.frame(f);
    for (std::size_t i = 0; i < b1.size(); ++i) {
      const double x = b1[i], y = b2[conjugate_pixel(i, p.width, p.height)];
      s1 += x;
      s2 += y;
      s11 += x * x;
      s22 += y * y;
      s12 += x * y;
    }
  }
  const double m1 = s1 / n, m2 = s2 / n;
  CHECK(m1 == doctest::Approx(expected.mean1).epsilon(0.01));
  CHECK(m2 == doctest::Approx(expected.mean2).epsilon(0.01));
  CHECK(s11 / n - m1 * m1 == doctest::Approx(expected.var1).epsilon(0.02));
  CHECK(s22 / n - m2 * m2 == doctest::Approx(expected.var2).epsilon(0.02));
  CHECK(s12 / n - m1 * m2 == doctest::Approx(expected.covariance).epsilon(0.03));
}

TEST_CASE("crosstalk conserves beam-2 photons away from edges and lowers the paired covariance") {
  SourceParams p;
  p.width = 32;
  p.height = 32;
  p.frames = 50;
  p.mean_per_mode = 0.01;
  p.eta1 = 1.0;
  p.eta2 = 1.0;
  p.crosstalk = 0.3;
  CHECK(p.geometric_factor() == doctest::Approx(0.7));
  CHECK(analytic_pair_stats(p).covariance ==
        doctest::Approx(0.7 * p.photons_per_pixel() * (1.0 + p.mean_per_mode)));
  const auto stacks = generate_stacks(p, 9);
  std::uint64_t t1 = 0, t2 = 0;
  for (auto v : stacks.beam1.data()) t1 += v;
  for (auto v : stacks.beam2.data()) t2 += v;
  // Only photons pushed off the border are lost.
  CHECK(t2 <= t1);
  CHECK(static_cast<double>(t2) > 0.97 * static_cast<double>(t1));
}

TEST_CASE("generation is deterministic and independent of thread count") {
  SourceParams p;
  p.width = 40;
  p.height = 30;
  p.frames = 12;
  const auto a = generate_stacks(p, 77, 1);
  const auto b = generate_stacks(p, 77, 4);
  CHECK(a.beam1 == b.beam1);
  CHECK(a.beam2 == b.beam2);
  const auto c = generate_stacks(p, 78, 1);
  CHECK_FALSE(a.beam1 == c.beam1);
  Rng r1 = make_stream(3, 0, StreamPurpose::source);
  Rng r2 = make_stream(3, 0, StreamPurpose::source);
  CHECK(generate_pair(p, r1).beam1 == generate_pair(p, r2).beam1);
}

TEST_CASE("source parameter validation") {
  SourceParams p;
  p.eta1 = 1.2;
  CHECK_ERROR_CODE(p.validate(), ErrorCode::invalid_parameter);
  p = {};
  p.modes_per_pair = 0;
  CHECK_ERROR_CODE(p.validate(), ErrorCode::invalid_parameter);
  p = {};
  p.crosstalk = 1.0;
  CHECK_ERROR_CODE(p.validate(), ErrorCode::invalid_parameter);
  p = {};
  p.mean_per_mode = -1.0;
  CHECK_ERROR_CODE(p.validate(), ErrorCode::invalid_parameter);
}

TEST_CASE("theoretical noise reduction factor and correlation") {
  CHECK(theoretical_nrf(0.54, 1.0, 1.0) == doctest::Approx(0.46));
  CHECK(theoretical_nrf(0.0, 1.5, 1.0) == doctest::Approx(1.25));
  CHECK(theoretical_nrf(1.0, 1.0, 0.8) == doctest::Approx(0.2));
  CHECK(theoretical_correlation(0.5, 0.8, 10.0) == doctest::Approx(4.0));
  CHECK_ERROR_CODE(theoretical_nrf(1.1, 1.0, 1.0), ErrorCode::invalid_parameter);
  CHECK_ERROR_CODE(theoretical_nrf(0.5, 0.0, 1.0), ErrorCode::invalid_parameter);
  CHECK_ERROR_CODE(theoretical_nrf(0.5, 1.0, 0.0), ErrorCode::invalid_parameter);
}
