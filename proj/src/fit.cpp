#include "emccd/fit.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "binned_fit.hpp"
#include "emccd/error.hpp"
#include "emccd/model.hpp"

namespace emccd {

namespace {

using detail::BinnedFitResult;
using detail::Objective;
using Eigen::VectorXd;

struct WindowBins {
  std::vector<double> lo;
  std::vector<double> hi;
  VectorXd observed;
  std::size_t nonzero = 0;
};

WindowBins select_bins(const Histogram& hist, CountWindow window) {
  WindowBins bins;
  std::vector<double> observed;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    const double c = hist.center(i);
    if (c < window.lo || c > window.hi) continue;
    bins.lo.push_back(hist.lower_edge(i));
    bins.hi.push_back(hist.upper_edge(i));
    observed.push_back(static_cast<double>(hist.counts[i]));
    if (hist.counts[i] > 0) ++bins.nonzero;
  }
  bins.observed = Eigen::Map<VectorXd>(observed.data(), static_cast<Eigen::Index>(observed.size()));
  return bins;
}

CountWindow clamp_to_span(const Histogram& hist, CountWindow w) {
  return {std::max(w.lo, hist.origin), std::min(w.hi, hist.span_end())};
}

// Probability mass of Normal(mu, sigma) in [lo, hi), accurate in both tails.
double gaussian_mass(double lo, double hi, double mu, double sigma) {
  if (lo >= mu) return read_noise_tail(lo, mu, sigma) - read_noise_tail(hi, mu, sigma);
  if (hi <= mu) return read_noise_tail(2 * mu - hi, mu, sigma) - read_noise_tail(2 * mu - lo, mu, sigma);
  return 1.0 - read_noise_tail(hi, mu, sigma) - read_noise_tail(2 * mu - lo, mu, sigma);
}

double emg_mass(double lo, double hi, double mu, double sigma, double gain) {
  return emg_tail(lo, mu, sigma, gain) - emg_tail(hi, mu, sigma, gain);
}

double dark_mass(double lo, double hi, double mu, double sigma, SpuriousCharge cic) {
  double mass = (1.0 - cic.prob) * gaussian_mass(lo, hi, mu, sigma);
  if (cic.prob > 0.0) mass += cic.prob * emg_mass(lo, hi, mu, sigma, cic.gain);
  return mass;
}

Estimate estimate_of(const BinnedFitResult& r, Eigen::Index i) {
  return {r.params[i], std::sqrt(std::max(r.covariance(i, i), 0.0))};
}

// Weighted log-linear regression log(count) = a + b x over nonzero bins.
struct LogLine {
  double intercept;
  double slope;
};

LogLine log_linear_regression(const WindowBins& bins) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Eigen::Index i = 0; i < bins.observed.size(); ++i) {
    const double k = bins.observed[i];
    if (k <= 0) continue;
    const double x = 0.5 * (bins.lo[i] + bins.hi[i]);
    const double y = std::log(k);
    sw += k;
    sx += k * x;
    sy += k * y;
    sxx += k * x * x;
    sxy += k * x * y;
  }
  const double denom = sw * sxx - sx * sx;
  require(denom > 0.0, ErrorCode::fit_failure, "degenerate log-linear regression");
  const double slope = (sw * sxy - sx * sy) / denom;
  return {(sy - slope * sx) / sw, slope};
}

void require_converged(const BinnedFitResult& r, const char* what) {
  require(r.converged && r.params.allFinite() && r.covariance.allFinite(), ErrorCode::fit_failure,
          std::string(what) + " did not converge within 200 iterations");
}

}  // namespace

double robust_width(const Histogram& hist) {
  return 0.5 * (hist.quantile(0.75) - hist.quantile(0.25)) / 0.6745;
}

CountWindow default_read_noise_window(const Histogram& hist) {
  const double mode = hist.mode();
  const double s = robust_width(hist);
  return {mode - 3.0 * s, mode + 2.0 * s};
}

ReadNoiseFit fit_read_noise(const Histogram& hist, std::optional<CountWindow> window,
                            SpuriousCharge known_cic) {
  require(hist.total > 0, ErrorCode::fit_failure, "empty histogram");
  const CountWindow w = clamp_to_span(hist, window.value_or(default_read_noise_window(hist)));
  const WindowBins bins = select_bins(hist, w);
  require(bins.observed.size() >= 5, ErrorCode::fit_failure,
          "fewer than 5 bins in the read-noise window");

  const double mu0 = hist.mode();
  const double sigma0 = std::max(robust_width(hist), hist.bin_width);
  double mass0 = 0.0;
  for (std::size_t i = 0; i < bins.lo.size(); ++i)
    mass0 += gaussian_mass(bins.lo[i], bins.hi[i], mu0, sigma0);
  const double entries0 = std::max(bins.observed.sum(), 1.0) / std::max(mass0, 1e-12);

  const auto model = [&](const VectorXd& p, VectorXd& expected) {
    expected.resize(bins.observed.size());
    for (Eigen::Index i = 0; i < expected.size(); ++i)
      expected[i] = p[0] * dark_mass(bins.lo[i], bins.hi[i], p[1], p[2], known_cic);
  };
  const auto to_natural = [&](const VectorXd& u) {
    VectorXd p(3);
    p << entries0 * std::exp(u[0]), u[1], sigma0 * std::exp(u[2]);
    return p;
  };
  VectorXd start(3);
  start << 0.0, mu0, 0.0;
  const auto r = detail::fit_binned(model, bins.observed, start, to_natural,
                                    Objective::weighted_least_squares);
  require_converged(r, "read-noise fit");

  ReadNoiseFit fit;
  fit.entries = estimate_of(r, 0);
  fit.mu = estimate_of(r, 1);
  fit.sigma = estimate_of(r, 2);
  fit.window = w;
  fit.reduced_chi2 = r.reduced_chi2;
  fit.iterations = r.iterations;
  return fit;
}

CicFit fit_cic(const Histogram& hist, double mu, double sigma, std::optional<CountWindow> window) {
  require(hist.total > 0, ErrorCode::fit_failure, "empty histogram");
  require(sigma > 0.0, ErrorCode::invalid_parameter, "sigma must be positive");
  const CountWindow w =
      clamp_to_span(hist, window.value_or(CountWindow{mu + 4.0 * sigma, hist.span_end()}));
  const WindowBins bins = select_bins(hist, w);
  require(bins.nonzero >= 5, ErrorCode::fit_failure, "fewer than 5 nonzero bins in the CIC window");

  const LogLine line = log_linear_regression(bins);
  require(line.slope < 0.0, ErrorCode::fit_failure, "tail is not decreasing");
  const double gain0 = -1.0 / line.slope;
  const double n = static_cast<double>(hist.total);
  const double log_prob0 = line.intercept + std::log(gain0) - std::log(n * hist.bin_width) -
                           0.5 * (sigma / gain0) * (sigma / gain0) - mu / gain0;
  const double prob0 = std::min(std::exp(log_prob0), 0.5);
  require(std::isfinite(prob0) && prob0 > 0.0, ErrorCode::fit_failure, "bad CIC starting point");

  const auto model = [&](const VectorXd& p, VectorXd& expected) {
    expected.resize(bins.observed.size());
    for (Eigen::Index i = 0; i < expected.size(); ++i)
      expected[i] = n * dark_mass(bins.lo[i], bins.hi[i], mu, sigma, {p[0], p[1]});
  };
  const auto to_natural = [](const VectorXd& u) {
    VectorXd p(2);
    p << std::exp(u[0]), std::exp(u[1]);
    return p;
  };
  VectorXd start(2);
  start << std::log(prob0), std::log(gain0);
  const auto r = detail::fit_binned(model, bins.observed, start, to_natural, Objective::poisson);
  require_converged(r, "CIC fit");

  CicFit fit;
  fit.cic_prob = estimate_of(r, 0);
  fit.cic_gain = estimate_of(r, 1);
  fit.window = w;
  fit.reduced_chi2 = r.reduced_chi2;
  fit.iterations = r.iterations;
  return fit;
}

GainFit fit_gain(const Histogram& hist, double mu, double sigma, std::optional<CountWindow> window,
                 SpuriousCharge known_cic) {
  require(hist.total > 0, ErrorCode::fit_failure, "empty histogram");
  require(sigma > 0.0, ErrorCode::invalid_parameter, "sigma must be positive");
  const CountWindow w =
      clamp_to_span(hist, window.value_or(CountWindow{mu + 4.0 * sigma, hist.span_end()}));
  const WindowBins bins = select_bins(hist, w);
  require(bins.nonzero >= 5, ErrorCode::fit_failure,
          "fewer than 5 nonzero bins in the gain window");

  const LogLine line = log_linear_regression(bins);
  require(line.slope < 0.0, ErrorCode::fit_failure, "tail is not decreasing");
  const double gain0 = -1.0 / line.slope;
  const double n = static_cast<double>(hist.total);
  const double lambda0 =
      std::clamp(bins.observed.sum() / (n * emg_tail(w.lo, mu, sigma, gain0)), 1e-6, 5.0);

  constexpr int kMaxElectrons = 8;
  const auto model = [&](const VectorXd& p, VectorXd& expected) {
    const double lambda = p[0];
    const double gain = p[1];
    expected.resize(bins.observed.size());
    std::vector<double> tails_lo(kMaxElectrons + 1), tails_hi(kMaxElectrons + 1);
    for (Eigen::Index i = 0; i < expected.size(); ++i) {
      double weight = std::exp(-lambda);
      double mass = weight * dark_mass(bins.lo[i], bins.hi[i], mu, sigma, known_cic);
      for (int k = 1; k <= kMaxElectrons; ++k) {
        weight *= lambda / k;
        if (weight < 1e-16) break;
        mass += weight * (erlang_gauss_tail(bins.lo[i], k, mu, sigma, gain) -
                          erlang_gauss_tail(bins.hi[i], k, mu, sigma, gain));
      }
      expected[i] = n * mass;
    }
  };
  const auto to_natural = [](const VectorXd& u) {
    VectorXd p(2);
    p << std::exp(u[0]), std::exp(u[1]);
    return p;
  };
  VectorXd start(2);
  start << std::log(lambda0), std::log(gain0);
  const auto r = detail::fit_binned(model, bins.observed, start, to_natural, Objective::poisson);
  require_converged(r, "gain fit");

  GainFit fit;
  fit.mean_photoelectrons = estimate_of(r, 0);
  fit.gain = estimate_of(r, 1);
  fit.window = w;
  fit.reduced_chi2 = r.reduced_chi2;
  fit.iterations = r.iterations;
  return fit;
}

DarkFit fit_dark(const Histogram& hist, int refinements) {
  DarkFit fit;
  fit.read_noise = fit_read_noise(hist);
  fit.cic = fit_cic(hist, fit.read_noise.mu.value, fit.read_noise.sigma.value);
  for (int i = 0; i < refinements; ++i) {
    fit.read_noise = fit_read_noise(hist, fit.read_noise.window,
                                    {fit.cic.cic_prob.value, fit.cic.cic_gain.value});
    fit.cic = fit_cic(hist, fit.read_noise.mu.value, fit.read_noise.sigma.value);
  }
  return fit;
}

}  // namespace emccd
