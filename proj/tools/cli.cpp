#include "cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "emccd/calibration.hpp"
#include "emccd/config.hpp"
#include "emccd/error.hpp"
#include "emccd/fit.hpp"
#include "emccd/frameio.hpp"
#include "emccd/histogram.hpp"
#include "emccd/model.hpp"
#include "emccd/parallel.hpp"
#include "emccd/readout.hpp"
#include "emccd/source.hpp"
#include "emccd/svg.hpp"

namespace emccd::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

struct Paths {
  std::string dark, illuminated, analog1, analog2, counting1, counting2, fit, eta0, curve;
};

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("emccd-cal");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("EMCCD_CAL_LOG");
    const std::string level = env ? env : "warn";
    l->set_level(level == "error"  ? spdlog::level::err
                 : level == "info" ? spdlog::level::info
                 : level == "debug" ? spdlog::level::debug
                                    : spdlog::level::warn);
    return l;
  }();
  return log;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_parse:
    case ErrorCode::parse_error: return kUsage;
    case ErrorCode::io_error:
    case ErrorCode::bad_magic:
    case ErrorCode::truncated_payload:
    case ErrorCode::unsupported_version:
    case ErrorCode::unsupported_dtype:
    case ErrorCode::size_mismatch: return kIo;
    case ErrorCode::contract_violation: return kContract;
    default: return kEstimation;
  }
}

RunConfig load_config(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) {
    std::string text;
    try {
      text = read_file(c.config);
    } catch (const Error&) {
      fail(ErrorCode::config_parse, "cannot read config " + c.config);
    }
    cfg = parse_run_config(text);
  }
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

fs::path in_out(const RunConfig& cfg, const std::string& explicit_path, const char* name) {
  return explicit_path.empty() ? fs::path(cfg.output_dir) / name : fs::path(explicit_path);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::io_error, "cannot create directory " + dir.string());
}

std::uint64_t mode_seed(std::uint64_t seed, std::uint64_t tag) { return splitmix64(seed ^ (tag << 40)); }

std::string provenance_json(const RunConfig& cfg, const std::string& mode) {
  Json j;
  j["mode"] = mode;
  j["config"] = Json::parse(to_json(cfg));
  j["config"].erase("output_dir");
  return j.dump();
}

Json estimate_json(const Estimate& e) { return Json{{"value", e.value}, {"uncertainty", e.uncertainty}}; }

void write_json(const fs::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Common& common, const std::string& mode) {
  const RunConfig cfg = load_config(common);
  const fs::path out(cfg.output_dir);
  ensure_dir(out);
  auto log = logger();
  const bool all = mode == "all";

  if (all || mode == "dark") {
    const std::uint64_t seed = mode_seed(cfg.seed, 1);
    const auto stack = render_dark_stack(cfg.source.width, cfg.source.height, cfg.frames.dark,
                                         cfg.detector, seed, common.threads);
    const fs::path p = out / "dark.emf";
    write_stack(stack, p, {seed, provenance_json(cfg, "dark")});
    std::cout << "dark: " << p.string() << "\n";
  }
  const auto twin = [&](const SourceParams& src, const std::string& name, std::uint64_t tag,
                        ReadoutMode readout) {
    const std::uint64_t seed = mode_seed(cfg.seed, tag);
    const auto pe = generate_stacks(src, seed, common.threads);
    const auto b1 = render_stack(pe.beam1, cfg.detector, seed, StreamPurpose::readout_beam1,
                                 readout, common.threads);
    const auto b2 = render_stack(pe.beam2, cfg.detector, seed, StreamPurpose::readout_beam2,
                                 readout, common.threads);
    const fs::path p1 = out / (name + "_beam1.emf");
    const fs::path p2 = out / (name + "_beam2.emf");
    write_stack(b1, p1, {seed, provenance_json(cfg, name)});
    write_stack(b2, p2, {seed, provenance_json(cfg, name)});
    std::cout << name << ": " << p1.string() << " " << p2.string() << "\n";
    std::cout << name << " p_ph: " << format_double(src.photons_per_pixel()) << "\n";
  };
  if (all || mode == "analog") twin(cfg.analog_source(), "analog", 2, ReadoutMode::conventional);
  if (all || mode == "counting") {
    const SourceParams src = cfg.counting_source();
    require(src.photons_per_pixel() < 0.15, ErrorCode::contract_violation,
            "low-illumination-violation: counting regime needs p_ph < 0.15, got " +
                format_double(src.photons_per_pixel()));
    twin(src, "counting", 3, ReadoutMode::electron_multiplying);
  }
  log->info("simulate finished");
  return kOk;
}

// ---------------------------------------------------------------- fit

struct Spread {
  double sd = std::nan("");
  std::size_t frames = 0;
};

Spread spread_of(const std::vector<double>& v) {
  Spread s;
  std::vector<double> ok;
  for (double x : v)
    if (std::isfinite(x)) ok.push_back(x);
  s.frames = ok.size();
  if (ok.size() < 2) return s;
  double m = 0.0;
  for (double x : ok) m += x;
  m /= static_cast<double>(ok.size());
  double ss = 0.0;
  for (double x : ok) ss += (x - m) * (x - m);
  s.sd = std::sqrt(ss / static_cast<double>(ok.size() - 1));
  return s;
}

// Pooled estimate; the reported uncertainty is the standard error implied
// by the frame-to-frame spread, falling back to the fit covariance.
Json parameter_json(const Estimate& pooled, const std::vector<double>& per_frame) {
  const Spread s = spread_of(per_frame);
  const double se = std::isfinite(s.sd) ? s.sd / std::sqrt(static_cast<double>(s.frames))
                                        : pooled.uncertainty;
  return Json{{"value", pooled.value},
              {"uncertainty", se},
              {"frame_spread", std::isfinite(s.sd) ? Json(s.sd) : Json(nullptr)},
              {"fit_uncertainty", pooled.uncertainty},
              {"frames_fitted", s.frames}};
}

int cmd_fit(const Common& common, const Paths& paths) {
  const RunConfig cfg = load_config(common);
  auto log = logger();
  const fs::path dark_path = in_out(cfg, paths.dark, "dark.emf");
  const FrameStack dark = read_stack(dark_path);
  require(dark.kind() == FrameKind::counts, ErrorCode::wrong_kind, "dark stack must hold counts");
  std::optional<FrameStack> lit;
  const fs::path lit_path = in_out(cfg, paths.illuminated, "counting_beam1.emf");
  if (!paths.illuminated.empty() || fs::exists(lit_path)) {
    lit = read_stack(lit_path);
    require(lit->kind() == FrameKind::counts, ErrorCode::wrong_kind,
            "illuminated stack must hold counts");
  } else {
    log->warn("no illuminated stack at {}; gain is not fitted", lit_path.string());
  }

  const DarkFit pooled = fit_dark(build_histogram(dark));
  log->info("pooled dark fit: mu={} sigma={} p_sc={} g_sc={}", pooled.read_noise.mu.value,
            pooled.read_noise.sigma.value, pooled.cic.cic_prob.value, pooled.cic.cic_gain.value);
  const std::size_t nd = dark.frames();
  std::vector<double> mu(nd, NAN), sigma(nd, NAN), p_sc(nd, NAN), g_sc(nd, NAN);
  parallel_for(nd, common.threads, [&](std::size_t f) {
    try {
      const DarkFit d = fit_dark(build_histogram(dark, f, 1));
      mu[f] = d.read_noise.mu.value;
      sigma[f] = d.read_noise.sigma.value;
      p_sc[f] = d.cic.cic_prob.value;
      g_sc[f] = d.cic.cic_gain.value;
    } catch (const Error&) {
    }
  });

  Json j;
  j["bias"] = parameter_json(pooled.read_noise.mu, mu);
  j["read_noise"] = parameter_json(pooled.read_noise.sigma, sigma);
  j["cic_prob"] = parameter_json(pooled.cic.cic_prob, p_sc);
  j["cic_gain"] = parameter_json(pooled.cic.cic_gain, g_sc);
  Json quality;
  quality["read_noise_reduced_chi2"] = pooled.read_noise.reduced_chi2;
  quality["read_noise_window"] = {pooled.read_noise.window.lo, pooled.read_noise.window.hi};
  quality["cic_reduced_chi2"] = pooled.cic.reduced_chi2;
  quality["cic_window"] = {pooled.cic.window.lo, pooled.cic.window.hi};

  if (lit) {
    const double m = pooled.read_noise.mu.value, s = pooled.read_noise.sigma.value;
    const SpuriousCharge cic{pooled.cic.cic_prob.value, pooled.cic.cic_gain.value};
    const GainFit gain = fit_gain(build_histogram(*lit), m, s, std::nullopt, cic);
    std::vector<double> g(lit->frames(), NAN);
    parallel_for(lit->frames(), common.threads, [&](std::size_t f) {
      try {
        g[f] = fit_gain(build_histogram(*lit, f, 1), m, s, std::nullopt, cic).gain.value;
      } catch (const Error&) {
      }
    });
    j["gain"] = parameter_json(gain.gain, g);
    j["mean_photoelectrons"] = estimate_json(gain.mean_photoelectrons);
    quality["gain_reduced_chi2"] = gain.reduced_chi2;
    quality["gain_window"] = {gain.window.lo, gain.window.hi};
  }
  j["fit_quality"] = quality;

  const fs::path out = in_out(cfg, paths.fit, "fit.json");
  ensure_dir(out.parent_path().empty() ? fs::path(".") : out.parent_path());
  write_json(out, j);
  std::cout << "fit: " << out.string() << "\n";
  for (const char* key : {"bias", "read_noise", "cic_prob", "cic_gain", "gain"})
    if (j.contains(key))
      std::cout << key << " = " << format_double(j[key]["value"].get<double>()) << " +- "
                << format_double(j[key]["uncertainty"].get<double>()) << "\n";
  return kOk;
}

struct FittedParams {
  EmccdParams params;
  EmccdParamErrors errors;
  bool has_gain = false;
};

FittedParams load_fit(const fs::path& path, const RunConfig& cfg) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    fail(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
  FittedParams f;
  f.params = cfg.detector;
  const auto take = [&](const char* key, double& value, double& err) {
    if (!j.contains(key)) return false;
    try {
      value = j[key].at("value").get<double>();
      const auto& u = j[key].at("uncertainty");
      err = u.is_number() ? u.get<double>() : 0.0;
    } catch (const Json::exception& e) {
      fail(ErrorCode::parse_error, path.string() + ": " + e.what());
    }
    return true;
  };
  take("bias", f.params.bias, f.errors.bias);
  take("read_noise", f.params.read_noise, f.errors.read_noise);
  take("cic_prob", f.params.cic_prob, f.errors.cic_prob);
  take("cic_gain", f.params.cic_gain, f.errors.cic_gain);
  f.has_gain = take("gain", f.params.gain, f.errors.gain);
  f.params.validate();
  return f;
}

// ---------------------------------------------------------------- calibrate

int cmd_calibrate(const Common& common, const Paths& paths) {
  const RunConfig cfg = load_config(common);
  auto log = logger();
  const FittedParams fit = load_fit(in_out(cfg, paths.fit, "fit.json"), cfg);
  require(fit.has_gain, ErrorCode::degenerate_input, "fit results hold no gain estimate");
  const FrameStack b1 = read_stack(in_out(cfg, paths.analog1, "analog_beam1.emf"));
  const FrameStack b2 = read_stack(in_out(cfg, paths.analog2, "analog_beam2.emf"));

  AnalogOptions opt;
  opt.geometric_factor = cfg.source.geometric_factor();
  opt.gain_uncertainty = fit.errors.gain;
  const auto cal = estimate_eta_analog(b1, b2, cfg.region_pairs(), fit.params, opt);
  if (!cal.consistent)
    log->warn("inconsistent-estimates: eta0 from zeta {} and from C {} differ by more than 3 sigma",
              cal.eta0.value, cal.eta0_from_correlation.value);

  Json j;
  j["eta0"] = estimate_json(cal.eta0);
  j["eta0_from_correlation"] = estimate_json(cal.eta0_from_correlation);
  j["consistent"] = cal.consistent;
  j["zeta"] = cal.zeta;
  j["alpha"] = cal.stats.alpha;
  j["n1_mean"] = cal.stats.n1_mean;
  j["n2_mean"] = cal.stats.n2_mean;
  j["covariance"] = cal.stats.covariance;
  j["samples"] = cal.stats.n_samples;
  j["geometric_factor"] = opt.geometric_factor;
  const fs::path out = in_out(cfg, paths.eta0, "eta0.json");
  write_json(out, j);
  std::cout << "eta0 = " << format_double(cal.eta0.value) << " +- "
            << format_double(cal.eta0.uncertainty) << " (from C: "
            << format_double(cal.eta0_from_correlation.value) << " +- "
            << format_double(cal.eta0_from_correlation.uncertainty) << ")\n";
  std::cout << "calibrate: " << out.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const Common& common, const Paths& paths, bool shared_frames) {
  const RunConfig cfg = load_config(common);
  auto log = logger();
  require(!cfg.threshold_grid.empty(), ErrorCode::config_parse, "threshold_grid is empty");
  FittedParams fit = load_fit(in_out(cfg, paths.fit, "fit.json"), cfg);
  if (!fit.has_gain) log->warn("fit results hold no gain; using the configured gain");

  const fs::path eta0_path = in_out(cfg, paths.eta0, "eta0.json");
  if (!paths.eta0.empty() || fs::exists(eta0_path)) {
    try {
      const Json j = Json::parse(read_file(eta0_path));
      fit.params.analog_efficiency = j.at("eta0").at("value").get<double>();
      fit.errors.analog_efficiency = j.at("eta0").at("uncertainty").get<double>();
    } catch (const Json::exception& e) {
      fail(ErrorCode::parse_error, eta0_path.string() + ": " + e.what());
    }
  } else {
    log->info("no analog calibration found; using configured eta0 = {}",
              cfg.detector.analog_efficiency);
  }
  fit.params.analog_efficiency = std::clamp(fit.params.analog_efficiency, 1e-12, 1.0);

  const FrameStack b1 = read_stack(in_out(cfg, paths.counting1, "counting_beam1.emf"));
  const FrameStack b2 = read_stack(in_out(cfg, paths.counting2, "counting_beam2.emf"));
  const FrameStack dark = read_stack(in_out(cfg, paths.dark, "dark.emf"));

  CountingOptions opt;
  opt.geometric_factor = cfg.source.geometric_factor();
  opt.disjoint_frames = !shared_frames;
  opt.param_errors = fit.errors;
  opt.threads = common.threads;
  const auto curve = estimate_eta_counting(b1, b2, dark, cfg.region_pairs(), cfg.threshold_grid,
                                           fit.params, opt);
  std::size_t below = 0;
  for (const auto& p : curve.points) below += p.below_validity;
  if (below > 0)
    log->warn("below-validity: {} of {} thresholds lie under mu + 2 sigma", below,
              curve.points.size());

  const fs::path out(cfg.output_dir);
  ensure_dir(out);
  const fs::path csv = paths.curve.empty() ? out / "curve.csv" : fs::path(paths.curve);
  write_curve_csv(curve, csv);
  const auto plot = [&](CurveQuantity q, const char* file, const char* title, const char* ylabel,
                        bool log_y) {
    try {
      render_svg(curve, q, out / file, {title, "threshold T (counts)", ylabel, log_y});
      std::cout << "sweep: " << (out / file).string() << "\n";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::empty_data) throw;
      log->warn("nothing to plot in {}", file);
    }
  };
  plot(CurveQuantity::efficiency, "eta.svg", "Threshold efficiency", "eta(T)", false);
  plot(CurveQuantity::noise, "noise.svg", "Noise click probability", "Noise(T)", true);
  std::cout << "sweep: " << csv.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- compare

struct ChiSquare {
  double value = 0.0;
  std::size_t points = 0;
  double scale = 1.0;
  double reduced() const { return points > 0 ? value / static_cast<double>(points) : std::nan(""); }
};

int cmd_compare(const Common& common, const Paths& paths) {
  RunConfig cfg;
  if (!common.config.empty() || !common.out.empty()) cfg = load_config(common);
  const fs::path csv = in_out(cfg, paths.curve, "curve.csv");
  std::string text;
  text = read_file(csv);
  const CalibrationCurve curve = decode_curve_csv(text);

  // Efficiency: a common normalisation nuisance s with prior width equal to
  // the relative eta0 uncertainty is profiled out in closed form.
  std::vector<std::size_t> eta_idx, noise_idx;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    if (!p.below_validity && std::isfinite(p.eta_measured) && std::isfinite(p.eta_uncertainty))
      eta_idx.push_back(i);
    if (std::isfinite(p.noise_measured) && std::isfinite(p.noise_uncertainty)) noise_idx.push_back(i);
  }
  const auto eta_sigma = [&](const CurvePoint& p) {
    const double s = std::hypot(p.eta_uncertainty, p.eta_pred_uncertainty);
    require(s > 0.0, ErrorCode::parse_error,
            "zero eta uncertainty at T = " + format_double(p.threshold));
    return s;
  };
  const auto noise_sigma = [&](const CurvePoint& p) {
    const double s = std::hypot(p.noise_uncertainty, p.noise_pred_uncertainty);
    require(s > 0.0, ErrorCode::parse_error,
            "zero noise uncertainty at T = " + format_double(p.threshold));
    return s;
  };

  ChiSquare eta;
  {
    double delta = 0.0;
    for (auto i : eta_idx) delta = std::max(delta, curve.points[i].eta_scale_uncertainty);
    double num = 0.0, den = 0.0;
    for (auto i : eta_idx) {
      const auto& p = curve.points[i];
      const double w = 1.0 / std::pow(eta_sigma(p), 2);
      num += w * p.eta_measured * p.eta_predicted;
      den += w * p.eta_predicted * p.eta_predicted;
    }
    if (delta > 0.0 && den > 0.0) eta.scale = (num + 1.0 / (delta * delta)) / (den + 1.0 / (delta * delta));
    for (auto i : eta_idx) {
      const auto& p = curve.points[i];
      eta.value += std::pow((p.eta_measured - eta.scale * p.eta_predicted) / eta_sigma(p), 2);
    }
    if (delta > 0.0) eta.value += std::pow((eta.scale - 1.0) / delta, 2);
    eta.points = eta_idx.size();
  }
  // Noise: every point is a tail fraction of the same dark pixels. Under the
  // prediction q the rates at T_i < T_j have covariance q_j (1 - q_i) / N.
  // The effective pixel count N is read off the measured errors.
  ChiSquare noise;
  noise.points = noise_idx.size();
  if (!noise_idx.empty()) {
    double binom = 0.0, var = 0.0;
    for (auto i : noise_idx) {
      const auto& p = curve.points[i];
      noise_sigma(p);
      binom += p.noise_measured * (1.0 - p.noise_measured);
      var += p.noise_uncertainty * p.noise_uncertainty;
    }
    const double pixels = var > 0.0 ? binom / var : 0.0;
    const auto n = static_cast<Eigen::Index>(noise_idx.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd resid(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const auto& pa = curve.points[noise_idx[a]];
      resid(a) = pa.noise_measured - pa.noise_predicted;
      cov(a, a) = pa.noise_pred_uncertainty * pa.noise_pred_uncertainty;
      if (!(pixels > 0.0)) {
        cov(a, a) += pa.noise_uncertainty * pa.noise_uncertainty;
        continue;
      }
      for (Eigen::Index b = 0; b <= a; ++b) {
        const auto& pb = curve.points[noise_idx[b]];
        const double lo = std::max(pa.noise_predicted, pb.noise_predicted);
        const double hi = std::min(pa.noise_predicted, pb.noise_predicted);
        const double c = std::clamp(hi, 0.0, 1.0) * (1.0 - std::clamp(lo, 0.0, 1.0)) / pixels;
        cov(a, b) += c;
        if (b != a) cov(b, a) += c;
      }
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all(),
            ErrorCode::parse_error, "noise covariance is not positive definite");
    noise.value = resid.dot(ldlt.solve(resid));
  }

  Json report;
  Json rows = Json::array();
  for (const auto& p : curve.points) {
    Json r;
    r["T"] = p.threshold;
    r["below_validity"] = p.below_validity;
    r["eta_pull"] = std::isfinite(p.eta_measured)
                        ? Json((p.eta_measured - eta.scale * p.eta_predicted) /
                               std::hypot(p.eta_uncertainty, p.eta_pred_uncertainty))
                        : Json(nullptr);
    r["noise_pull"] = std::isfinite(p.noise_measured)
                          ? Json((p.noise_measured - p.noise_predicted) /
                                 std::hypot(p.noise_uncertainty, p.noise_pred_uncertainty))
                          : Json(nullptr);
    rows.push_back(r);
  }
  report["points"] = rows;
  report["eta"] = {{"chi2", eta.value},
                   {"points", eta.points},
                   {"reduced_chi2", eta.points ? Json(eta.reduced()) : Json(nullptr)},
                   {"scale", eta.scale}};
  report["noise"] = {{"chi2", noise.value},
                     {"points", noise.points},
                     {"reduced_chi2", noise.points ? Json(noise.reduced()) : Json(nullptr)}};
  const bool agree = (eta.points == 0 || eta.reduced() <= 2.0) &&
                     (noise.points == 0 || noise.reduced() <= 2.0);
  report["agree"] = agree;

  std::cout << "T,eta_pull,noise_pull\n";
  for (const auto& r : rows)
    std::cout << format_double(r["T"].get<double>()) << ","
              << (r["eta_pull"].is_null() ? "nan" : format_double(r["eta_pull"].get<double>())) << ","
              << (r["noise_pull"].is_null() ? "nan" : format_double(r["noise_pull"].get<double>()))
              << "\n";
  std::cout << "eta reduced chi2 = " << format_double(eta.reduced()) << " over " << eta.points
            << " points (scale " << format_double(eta.scale) << ")\n";
  std::cout << "noise reduced chi2 = " << format_double(noise.reduced()) << " over "
            << noise.points << " points\n";
  const fs::path out = csv.parent_path().empty() ? fs::path("compare.json")
                                                 : csv.parent_path() / "compare.json";
  write_json(out, report);
  if (!agree) {
    logger()->error("disagreement: reduced chi-square above 2");
    return kDisagreement;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"EMCCD absolute calibration with twin beams"};
  app.require_subcommand(1);
  Common common;
  Paths paths;
  std::string mode = "all";
  bool shared_frames = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "run configuration (JSON)");
    sub->add_option("--out", common.out, "output directory (overrides config)");
    sub->add_option("--seed", common.seed, "master seed (overrides config)");
    sub->add_option("--threads", common.threads, "worker threads, 0 = auto");
  };
  auto* simulate = app.add_subcommand("simulate", "write simulated EMF1 stacks");
  add_common(simulate);
  simulate->add_option("--mode", mode, "dark | analog | counting | all")
      ->check(CLI::IsMember({"dark", "analog", "counting", "all"}));

  auto* fit = app.add_subcommand("fit", "fit detector parameters from histograms");
  add_common(fit);
  fit->add_option("--dark", paths.dark, "dark stack");
  fit->add_option("--illuminated", paths.illuminated, "dimly illuminated stack");
  fit->add_option("--fit", paths.fit, "output JSON");

  auto* calibrate = app.add_subcommand("calibrate", "analog-regime eta0 from twin beams");
  add_common(calibrate);
  calibrate->add_option("--beam1", paths.analog1, "analog beam-1 stack");
  calibrate->add_option("--beam2", paths.analog2, "analog beam-2 stack");
  calibrate->add_option("--fit", paths.fit, "fit results JSON");
  calibrate->add_option("--eta0", paths.eta0, "output JSON");

  auto* sweep = app.add_subcommand("sweep", "counting-regime eta(T) and Noise(T)");
  add_common(sweep);
  sweep->add_option("--beam1", paths.counting1, "counting beam-1 stack");
  sweep->add_option("--beam2", paths.counting2, "counting beam-2 stack");
  sweep->add_option("--dark", paths.dark, "dark stack");
  sweep->add_option("--fit", paths.fit, "fit results JSON");
  sweep->add_option("--eta0", paths.eta0, "analog calibration JSON");
  sweep->add_option("--curve", paths.curve, "output CSV");
  sweep->add_flag("--shared-frames", shared_frames,
                  "use every frame at every threshold (points become correlated)");

  auto* compare = app.add_subcommand("compare", "pulls and reduced chi-square of a curve");
  add_common(compare);
  compare->add_option("--curve", paths.curve, "curve CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  auto log = logger();
  try {
    if (*simulate) return cmd_simulate(common, mode);
    if (*fit) return cmd_fit(common, paths);
    if (*calibrate) return cmd_calibrate(common, paths);
    if (*sweep) return cmd_sweep(common, paths, shared_frames);
    if (*compare) return cmd_compare(common, paths);
  } catch (const Error& e) {
    log->error("{}", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return kEstimation;
  }
  return kUsage;
}

}  // namespace emccd::cli
