#include "emccd/correlation.hpp"

#include "emccd/error.hpp"
#include "emccd/readout.hpp"

namespace emccd {

PairSums& PairSums::operator+=(const PairSums& o) {
  count += o.count;
  s1 += o.s1;
  s2 += o.s2;
  s11 += o.s11;
  s22 += o.s22;
  s12 += o.s12;
  return *this;
}

PairSums& PairSums::operator-=(const PairSums& o) {
  count -= o.count;
  s1 -= o.s1;
  s2 -= o.s2;
  s11 -= o.s11;
  s22 -= o.s22;
  s12 -= o.s12;
  return *this;
}

namespace {

// Statistics of samples whose power sums were taken after subtracting
// (c1, c2) from every pair; centring keeps the sums well conditioned.
PairStatistics statistics_of(const PairSums& sums, double c1, double c2) {
  require(sums.count >= 2.0, ErrorCode::degenerate_input, "need at least 2 samples");
  const double n = sums.count;
  const double m1 = sums.s1 / n;
  const double m2 = sums.s2 / n;
  PairStatistics st;
  st.n_samples = static_cast<std::size_t>(n);
  st.n1_mean = m1 + c1;
  st.n2_mean = m2 + c2;
  require(st.n2_mean != 0.0, ErrorCode::degenerate_input, "mean of the second series is zero");
  st.alpha = st.n1_mean / st.n2_mean;
  const double a = st.alpha;
  const double d_mean = m1 - a * m2;
  st.difference_variance =
      (sums.s11 - 2.0 * a * sums.s12 + a * a * sums.s22 - n * d_mean * d_mean) / (n - 1.0);
  st.covariance = (sums.s12 - n * m1 * m2) / (n - 1.0);
  const double denom = st.n1_mean + a * st.n2_mean;
  require(denom != 0.0, ErrorCode::degenerate_input, "zero shot-noise level");
  st.zeta = st.difference_variance / denom;
  return st;
}

}  // namespace

PairStatistics pair_statistics(const PairSums& sums, double centre1, double centre2) {
  return statistics_of(sums, centre1, centre2);
}

PairStatistics pair_statistics(std::span<const double> n1, std::span<const double> n2) {
  require(n1.size() == n2.size(), ErrorCode::invalid_parameter, "series lengths differ");
  require(n1.size() >= 2, ErrorCode::degenerate_input, "need at least 2 samples");
  const double c1 = n1[0];
  const double c2 = n2[0];
  PairSums sums;
  for (std::size_t i = 0; i < n1.size(); ++i) sums.add(n1[i] - c1, n2[i] - c2);
  return statistics_of(sums, c1, c2);
}

std::vector<double> region_sums(const FrameStack& stack, const std::vector<std::size_t>& mask) {
  require(!mask.empty(), ErrorCode::empty_region, "region mask is empty");
  for (std::size_t p : mask)
    require(p < stack.pixels_per_frame(), ErrorCode::invalid_parameter, "mask pixel out of range");
  std::vector<double> sums(stack.frames());
  for (std::size_t f = 0; f < stack.frames(); ++f) {
    const auto frame = stack.frame(f);
    std::uint64_t s = 0;
    for (std::size_t p : mask) s += frame[p];
    sums[f] = static_cast<double>(s);
  }
  return sums;
}

ClickCounts count_region_clicks(const FrameStack& clicks, const std::vector<std::size_t>& mask,
                                Threshold t, const EmccdParams& params) {
  require(clicks.kind() == FrameKind::clicks, ErrorCode::wrong_kind,
          "count_region_clicks expects a click stack");
  require(clicks.frames() > 0, ErrorCode::empty_stack, "click stack has no frames");
  const auto sums = region_sums(clicks, mask);
  ClickCounts c;
  for (double s : sums) c.n_click += s;
  c.n_click /= static_cast<double>(sums.size());
  c.n_noise = static_cast<double>(mask.size()) * predicted_noise_click_rate(t, params);
  c.n_true = c.n_click - c.n_noise;
  return c;
}

}  // namespace emccd
