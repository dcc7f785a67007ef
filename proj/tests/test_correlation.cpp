#include <doctest.h>

#include <random>
#include <vector>

#include "check_error.hpp"
#include "emccd/correlation.hpp"
#include "emccd/readout.hpp"
#include "emccd/region.hpp"
#include "emccd/source.hpp"

using namespace emccd;

TEST_CASE("pair statistics on a hand-checked series") {
  const std::vector<double> n1{1, 2, 3, 4};
  const std::vector<double> n2{2, 2, 4, 4};
  const auto st = pair_statistics(n1, n2);
  CHECK(st.n1_mean == 2.5);
  CHECK(st.n2_mean == 3.0);
  CHECK(st.alpha == doctest::Approx(2.5 / 3.0));
  // Cov = sum((x - 2.5)(y - 3)) / 3 = (1.5 + 0.5 + 0.5 + 1.5) / 3
  CHECK(st.covariance == doctest::Approx(4.0 / 3.0));
  const double a = 2.5 / 3.0;
  double ss = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double d = n1[i] - a * n2[i];
    ss += d * d;
  }
  const double var = (ss - 4.0 * 0.0) / 3.0;  // mean of N1 - alpha N2 is zero by construction
  CHECK(st.difference_variance == doctest::Approx(var));
  CHECK(st.zeta == doctest::Approx(var / (2.5 + a * 3.0)));
  CHECK(st.n_samples == 4);
}

TEST_CASE("identical series have zero difference variance") {
  const std::vector<double> n{3, 7, 5, 9, 4};
  const auto st = pair_statistics(n, n);
  CHECK(st.alpha == 1.0);
  CHECK(st.difference_variance == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(st.zeta == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("centred sums give the same statistics as the span form") {
  Rng rng = make_stream(4, 0, StreamPurpose::test);
  std::normal_distribution<double> d(1e6, 30.0);
  std::vector<double> a(1000), b(1000);
  PairSums sums;
  const double c1 = 1e6, c2 = 1e6 + 5;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = d(rng);
    b[i] = a[i] + 5.0 + d(rng) - 1e6;
    sums.add(a[i] - c1, b[i] - c2);
  }
  const auto x = pair_statistics(a, b);
  const auto y = pair_statistics(sums, c1, c2);
  CHECK(x.difference_variance == doctest::Approx(y.difference_variance).epsilon(1e-9));
  CHECK(x.covariance == doctest::Approx(y.covariance).epsilon(1e-9));
  CHECK(x.n1_mean == doctest::Approx(y.n1_mean).epsilon(1e-14));
  // Sums subtract back out exactly.
  PairSums part = sums;
  PairSums extra;
  extra.add(1.0, 2.0);
  part += extra;
  part -= extra;
  CHECK(part.count == sums.count);
  CHECK(part.s12 == doctest::Approx(sums.s12));
}

TEST_CASE("pair statistics error paths") {
  const std::vector<double> one{1.0};
  CHECK_ERROR_CODE(pair_statistics(one, one), ErrorCode::degenerate_input);
  const std::vector<double> a{1.0, 2.0}, b{1.0, 2.0, 3.0};
  CHECK_ERROR_CODE(pair_statistics(a, b), ErrorCode::invalid_parameter);
  const std::vector<double> z{0.0, 0.0};
  CHECK_ERROR_CODE(pair_statistics(a, z), ErrorCode::degenerate_input);
}

TEST_CASE("noise reduction factor of simulated photoelectrons") {
  // zeta = (1 + alpha)/2 - eta A for binomially thinned twin beams.
  SourceParams p;
  p.width = 64;
  p.height = 64;
  p.frames = 1;
  p.modes_per_pair = 500;
  p.mean_per_mode = 0.001;
  p.eta1 = 0.6;
  p.eta2 = 0.6;
  Rng rng = make_stream(6, 0, StreamPurpose::test);
  std::vector<double> n1, n2;
  for (int f = 0; f < 20'000; ++f) {
    const auto pair = generate_pair(p, rng);
    n1.push_back(pair.beam1[1000]);
    n2.push_back(pair.beam2[conjugate_pixel(1000, p.width, p.height)]);
    n1.push_back(pair.beam1[2000]);
    n2.push_back(pair.beam2[conjugate_pixel(2000, p.width, p.height)]);
  }
  const auto st = pair_statistics(n1, n2);
  CHECK(st.zeta == doctest::Approx(theoretical_nrf(0.6, st.alpha, 1.0)).epsilon(0.05));
}

TEST_CASE("region sums and click counts") {
  FrameStack s(3, 2, 2, FrameKind::clicks);
  const std::vector<std::uint32_t> v{1, 0, 1, 1, 1, 0, 0, 0, 1, 1, 0, 1};
  std::copy(v.begin(), v.end(), s.data().begin());
  const std::vector<std::size_t> mask{0, 2, 3};
  CHECK(region_sums(s, mask) == std::vector<double>{3.0, 2.0});
  const EmccdParams p;
  const auto c = count_region_clicks(s, mask, {600.0}, p);
  CHECK(c.n_click == 2.5);
  CHECK(c.n_noise == doctest::Approx(3.0 * predicted_noise_click_rate({600.0}, p)));
  CHECK(c.n_true == doctest::Approx(c.n_click - c.n_noise));
  FrameStack counts(3, 2, 2, FrameKind::counts);
  CHECK_ERROR_CODE(count_region_clicks(counts, mask, {600.0}, p), ErrorCode::wrong_kind);
  CHECK_ERROR_CODE(region_sums(s, {}), ErrorCode::empty_region);
  CHECK_ERROR_CODE(region_sums(s, {6}), ErrorCode::invalid_parameter);
}
