#include "emccd/calibration.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "emccd/error.hpp"
#include "emccd/model.hpp"
#include "emccd/parallel.hpp"
#include "emccd/readout.hpp"

namespace emccd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_pair(const FrameStack& beam1, const FrameStack& beam2,
                const std::vector<RegionPair>& regions) {
  require(beam1.kind() == FrameKind::counts && beam2.kind() == FrameKind::counts,
          ErrorCode::wrong_kind, "calibration expects counts stacks");
  require(beam1.width() == beam2.width() && beam1.height() == beam2.height() &&
              beam1.frames() == beam2.frames(),
          ErrorCode::invalid_parameter, "beam stacks differ in shape");
  require(beam1.frames() >= 2, ErrorCode::degenerate_input, "need at least 2 frames");
  validate_region_pairs(regions, beam1.pixels_per_frame());
}

struct MeanMaskSizes {
  double k1 = 0.0;
  double k2 = 0.0;
};

MeanMaskSizes mean_mask_sizes(const std::vector<RegionPair>& regions) {
  MeanMaskSizes m;
  for (const auto& r : regions) {
    m.k1 += static_cast<double>(r.beam1.size());
    m.k2 += static_cast<double>(r.beam2.size());
  }
  m.k1 /= static_cast<double>(regions.size());
  m.k2 /= static_cast<double>(regions.size());
  return m;
}

std::uint64_t mask_sum(std::span<const std::uint32_t> frame, const std::vector<std::size_t>& mask) {
  std::uint64_t s = 0;
  for (std::size_t p : mask) s += frame[p];
  return s;
}

std::size_t mask_clicks(std::span<const std::uint32_t> frame, const std::vector<std::size_t>& mask,
                        double t) {
  std::size_t s = 0;
  for (std::size_t p : mask) s += static_cast<double>(frame[p]) > t;
  return s;
}

// Delete-one-block jackknife of a scalar estimator over block sums.
template <typename Estimator>
double jackknife_sd(const std::vector<PairSums>& blocks, const PairSums& total,
                    Estimator&& estimator) {
  const std::size_t b = blocks.size();
  if (b < 2) return kNaN;
  std::vector<double> values(b);
  double mean = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    PairSums s = total;
    s -= blocks[i];
    values[i] = estimator(s);
    mean += values[i];
  }
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(b - 1) / static_cast<double>(b));
}

std::size_t block_of(std::size_t frame, std::size_t frames, std::size_t blocks) {
  return frame * blocks / frames;
}

double propagate(const std::function<double(const EmccdParams&)>& f, const EmccdParams& params,
                 const EmccdParamErrors& errors) {
  const std::pair<double EmccdParams::*, double> terms[] = {
      {&EmccdParams::gain, errors.gain},         {&EmccdParams::cic_gain, errors.cic_gain},
      {&EmccdParams::cic_prob, errors.cic_prob}, {&EmccdParams::bias, errors.bias},
      {&EmccdParams::read_noise, errors.read_noise}};
  double var = 0.0;
  for (const auto& [member, err] : terms) {
    if (!(err > 0.0)) continue;
    EmccdParams up = params;
    EmccdParams down = params;
    up.*member += err;
    down.*member -= err;
    double span = 2.0 * err;
    // Fall back to a one-sided difference when stepping down leaves the
    // parameter domain (e.g. a spurious-charge probability below zero).
    if (down.*member < 0.0 || (member != &EmccdParams::cic_prob && down.*member <= 0.0)) {
      down = params;
      span = err;
    }
    const double d = (f(up) - f(down)) / span * err;
    var += d * d;
  }
  return std::sqrt(var);
}

}  // namespace

double predicted_noise_uncertainty(Threshold t, const EmccdParams& params,
                                   const EmccdParamErrors& errors) {
  return propagate([t](const EmccdParams& p) { return predicted_noise_click_rate(t, p); }, params,
                   errors);
}

double predicted_efficiency_uncertainty(Threshold t, const EmccdParams& params,
                                        const EmccdParamErrors& errors) {
  return propagate([t](const EmccdParams& p) { return predicted_efficiency(t, p); }, params,
                   errors);
}

AnalogCalibration estimate_eta_analog(const FrameStack& beam1, const FrameStack& beam2,
                                      const std::vector<RegionPair>& regions,
                                      const EmccdParams& params, const AnalogOptions& options) {
  params.validate();
  check_pair(beam1, beam2, regions);
  const double a_geo = options.geometric_factor;
  require(a_geo > 0.0 && a_geo <= 1.0, ErrorCode::invalid_parameter,
          "geometric factor must lie in (0, 1]");

  const std::size_t frames = beam1.frames();
  const std::size_t n_blocks = std::min(std::max<std::size_t>(options.blocks, 2), frames);
  const double g = params.gain;
  const auto photoelectrons = [&](std::uint64_t sum, std::size_t pixels) {
    const double k = static_cast<double>(pixels);
    return (static_cast<double>(sum) - k * params.bias) / g - k * params.cic_prob;
  };

  // Centre the sums on the first sample.
  const double c1 = photoelectrons(mask_sum(beam1.frame(0), regions[0].beam1), regions[0].beam1.size());
  const double c2 = photoelectrons(mask_sum(beam2.frame(0), regions[0].beam2), regions[0].beam2.size());
  std::vector<PairSums> blocks(n_blocks);
  for (std::size_t f = 0; f < frames; ++f) {
    PairSums& block = blocks[block_of(f, frames, n_blocks)];
    for (const auto& r : regions) {
      const double n1 = photoelectrons(mask_sum(beam1.frame(f), r.beam1), r.beam1.size());
      const double n2 = photoelectrons(mask_sum(beam2.frame(f), r.beam2), r.beam2.size());
      block.add(n1 - c1, n2 - c2);
    }
  }
  PairSums total;
  for (const auto& b : blocks) total += b;

  const double s = params.read_noise / g;
  const double v_e = s * s + params.cic_prob * (1.0 - params.cic_prob) + 1.0 / (12.0 * g * g);
  const MeanMaskSizes k = mean_mask_sizes(regions);
  const auto corrected_zeta = [&](const PairStatistics& st) {
    const double electronic = (k.k1 + st.alpha * st.alpha * k.k2) * v_e;
    return (st.difference_variance - electronic) / (st.n1_mean + st.alpha * st.n2_mean);
  };
  const auto eta_zeta = [&](const PairSums& sums) {
    const auto st = pair_statistics(sums, c1, c2);
    return ((1.0 + st.alpha) / 2.0 - corrected_zeta(st)) / a_geo;
  };
  const auto eta_corr = [&](const PairSums& sums) {
    const auto st = pair_statistics(sums, c1, c2);
    return st.covariance / (a_geo * st.n1_mean);
  };

  AnalogCalibration out;
  out.stats = pair_statistics(total, c1, c2);
  require(out.stats.n1_mean > 0.0 && out.stats.n2_mean > 0.0, ErrorCode::degenerate_input,
          "no signal in the analog regions");
  out.zeta = corrected_zeta(out.stats);
  out.electronic_variance = v_e;
  out.eta0.value = eta_zeta(total);
  out.eta0_from_correlation.value = eta_corr(total);
  const double gain_term = out.zeta * options.gain_uncertainty / g / a_geo;
  out.eta0.uncertainty = std::hypot(jackknife_sd(blocks, total, eta_zeta), gain_term);
  out.eta0_from_correlation.uncertainty =
      std::hypot(jackknife_sd(blocks, total, eta_corr),
                 out.eta0_from_correlation.value * options.gain_uncertainty / g);
  out.consistent = std::abs(out.eta0.value - out.eta0_from_correlation.value) <=
                   3.0 * std::hypot(out.eta0.uncertainty, out.eta0_from_correlation.uncertainty);
  return out;
}

CalibrationCurve estimate_eta_counting(const FrameStack& beam1, const FrameStack& beam2,
                                       const FrameStack& dark,
                                       const std::vector<RegionPair>& regions,
                                       const std::vector<Threshold>& thresholds,
                                       const EmccdParams& params, const CountingOptions& options) {
  params.validate();
  check_pair(beam1, beam2, regions);
  require(!thresholds.empty(), ErrorCode::invalid_parameter, "threshold grid is empty");
  const double a_geo = options.geometric_factor;
  require(a_geo > 0.0 && a_geo <= 1.0, ErrorCode::invalid_parameter,
          "geometric factor must lie in (0, 1]");
  if (dark.frames() > 0)
    require(dark.kind() == FrameKind::counts, ErrorCode::wrong_kind, "dark stack must hold counts");

  const std::size_t frames = beam1.frames();
  const std::size_t n_t = thresholds.size();
  if (options.disjoint_frames)
    require(frames >= 2 * n_t, ErrorCode::degenerate_input,
            "fewer than 2 frames per threshold with disjoint frame sets");
  const MeanMaskSizes k = mean_mask_sizes(regions);
  const double scale_err = params.analog_efficiency > 0.0
                               ? options.param_errors.analog_efficiency / params.analog_efficiency
                               : 0.0;

  CalibrationCurve curve;
  curve.points.resize(n_t);
  parallel_for(n_t, options.threads, [&](std::size_t ti) {
    const Threshold t = thresholds[ti];
    CurvePoint& pt = curve.points[ti];
    pt.threshold = t.value;
    pt.below_validity = t.value < params.bias + 2.0 * params.read_noise;
    pt.eta_predicted = predicted_efficiency(t, params);
    pt.noise_predicted = predicted_noise_click_rate(t, params);
    pt.eta_pred_uncertainty = predicted_efficiency_uncertainty(t, params, options.param_errors);
    pt.noise_pred_uncertainty = predicted_noise_uncertainty(t, params, options.param_errors);
    pt.eta_scale_uncertainty = scale_err;

    // Dark click rate per frame, jackknifed over frame blocks.
    pt.noise_measured = pt.noise_uncertainty = kNaN;
    if (dark.frames() > 0) {
      const std::size_t nd = dark.frames();
      const std::size_t nb = std::min(options.blocks, nd);
      std::vector<PairSums> blocks(std::max<std::size_t>(nb, 1));
      for (std::size_t f = 0; f < nd; ++f) {
        std::size_t c = 0;
        for (std::uint32_t v : dark.frame(f)) c += static_cast<double>(v) > t.value;
        blocks[block_of(f, nd, blocks.size())].add(static_cast<double>(c), 1.0);
      }
      PairSums total;
      for (const auto& b : blocks) total += b;
      const double pixels = static_cast<double>(dark.pixels_per_frame());
      const auto rate = [pixels](const PairSums& s) { return s.s1 / (s.count * pixels); };
      pt.noise_measured = rate(total);
      pt.noise_uncertainty = jackknife_sd(blocks, total, rate);
    }

    pt.eta_measured = pt.eta_uncertainty = pt.eta_from_correlation = kNaN;
    const double nu = pt.noise_predicted;
    if (!(nu < 1.0)) return;
    std::size_t first = 0, last = frames;
    if (options.disjoint_frames) {
      first = ti * frames / n_t;
      last = (ti + 1) * frames / n_t;
    }
    const std::size_t used = last - first;
    const std::size_t n_blocks = std::min(std::max<std::size_t>(options.blocks, 2), used);
    std::vector<PairSums> blocks(n_blocks);
    for (std::size_t f = first; f < last; ++f) {
      PairSums& block = blocks[block_of(f - first, used, n_blocks)];
      for (const auto& r : regions) {
        const double k1 = static_cast<double>(r.beam1.size());
        const double k2 = static_cast<double>(r.beam2.size());
        const double true1 = static_cast<double>(mask_clicks(beam1.frame(f), r.beam1, t.value)) - k1 * nu;
        const double true2 = static_cast<double>(mask_clicks(beam2.frame(f), r.beam2, t.value)) - k2 * nu;
        block.add(true1 / (1.0 - nu), true2 / (1.0 - nu));
      }
    }
    PairSums total;
    for (const auto& b : blocks) total += b;

    const auto signal_statistics = [](const PairSums& sums) {
      const auto st = pair_statistics(sums);
      require(st.n1_mean > 0.0 && st.n2_mean > 0.0, ErrorCode::degenerate_input,
              "no photon clicks above the noise");
      return st;
    };
    const auto eta_zeta = [&](const PairSums& sums) {
      const auto st = signal_statistics(sums);
      const double m1 = st.n1_mean / k.k1;
      const double m2 = st.n2_mean / k.k2;
      const double w = nu / (1.0 - nu);
      const double noise_var = k.k1 * (1.0 - m1) * w + st.alpha * st.alpha * k.k2 * (1.0 - m2) * w;
      const double zeta = (st.difference_variance - noise_var) / (st.n1_mean + st.alpha * st.n2_mean);
      return ((1.0 + st.alpha) / 2.0 - zeta) / a_geo;
    };
    const auto eta_corr = [&](const PairSums& sums) {
      const auto st = signal_statistics(sums);
      return st.covariance / (a_geo * st.n1_mean);
    };
    try {
      pt.eta_measured = eta_zeta(total);
      pt.eta_uncertainty = jackknife_sd(blocks, total, eta_zeta);
      pt.eta_from_correlation = eta_corr(total);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_input) throw;
      pt.eta_measured = pt.eta_uncertainty = pt.eta_from_correlation = kNaN;
    }
    if (!std::isfinite(pt.eta_measured)) pt.eta_measured = pt.eta_uncertainty = kNaN;
  });
  return curve;
}

}  // namespace emccd
