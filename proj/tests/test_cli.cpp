#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "emccd/frameio.hpp"
#include "emccd/model.hpp"
#include "emccd/readout.hpp"

using namespace emccd;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"({
  "source": {"width": 64, "height": 64, "frames": {"dark": 40, "analog": 200, "counting": 200}},
  "regions": {"width": 40, "height": 40, "tile": 10},
  "threshold_grid": {"start": 600, "stop": 700, "step": 50},
  "seed": 5
})";

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "emccd-cal");
  return cli::run(args);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "emccd_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  write_file(p, text);
  return p;
}

// Runs simulate, fit, calibrate and sweep into dir; returns the first nonzero exit code.
int pipeline(const fs::path& dir, const std::string& threads) {
  const std::string cfg = write_config(dir, kSmallConfig).string();
  const std::string out = dir.string();
  for (const auto& cmd : {"simulate", "fit", "calibrate", "sweep"}) {
    const int code = run_cli({cmd, "--config", cfg, "--out", out, "--threads", threads});
    if (code != 0) return code;
  }
  return 0;
}

}  // namespace

TEST_CASE("pipeline runs end to end and is identical across thread counts") {
  const fs::path a = fresh_dir("pipe1");
  const fs::path b = fresh_dir("pipe3");
  REQUIRE(pipeline(a, "1") == 0);
  REQUIRE(pipeline(b, "3") == 0);
  for (const char* f : {"dark.emf", "analog_beam1.emf", "analog_beam2.emf", "counting_beam1.emf",
                        "counting_beam2.emf", "dark.emf.meta.json", "fit.json", "eta0.json",
                        "curve.csv", "eta.svg", "noise.svg"}) {
    INFO(f);
    REQUIRE(fs::exists(a / f));
    CHECK(read_file(a / f) == read_file(b / f));
  }
  const auto fit = nlohmann::json::parse(read_file(a / "fit.json"));
  for (const char* key : {"bias", "read_noise", "cic_prob", "cic_gain", "gain"}) CHECK(fit.contains(key));
  CHECK(std::abs(fit["gain"]["value"].get<double>() / 147.0 - 1.0) < 0.05);
  const auto eta0 = nlohmann::json::parse(read_file(a / "eta0.json"));
  CHECK(eta0["eta0"]["value"].get<double>() > 0.3);
  CHECK(eta0["eta0"]["value"].get<double>() < 0.8);

  const int code = run_cli({"compare", "--curve", (a / "curve.csv").string()});
  CHECK((code == 0 || code == 6));
  CHECK(fs::exists(a / "compare.json"));
  // Seeded determinism: a second run reproduces the stacks.
  REQUIRE(run_cli({"simulate", "--config", (a / "config.json").string(), "--out", (a / "again").string(),
                   "--mode", "dark"}) == 0);
  CHECK(read_file(a / "again" / "dark.emf") == read_file(a / "dark.emf"));
  // A different seed changes them.
  REQUIRE(run_cli({"simulate", "--config", (a / "config.json").string(), "--out", (a / "seed").string(),
                   "--mode", "dark", "--seed", "6"}) == 0);
  CHECK(read_file(a / "seed" / "dark.emf") != read_file(a / "dark.emf"));
}

TEST_CASE("dark-only fit omits the gain and calibrate then refuses") {
  const fs::path d = fresh_dir("dark_only");
  const std::string cfg = write_config(d, kSmallConfig).string();
  REQUIRE(run_cli({"simulate", "--config", cfg, "--out", d.string(), "--mode", "dark"}) == 0);
  REQUIRE(run_cli({"fit", "--config", cfg, "--out", d.string()}) == 0);
  const auto fit = nlohmann::json::parse(read_file(d / "fit.json"));
  CHECK_FALSE(fit.contains("gain"));
  CHECK(fit.contains("read_noise"));
  CHECK(fit.contains("cic_prob"));
  REQUIRE(run_cli({"simulate", "--config", cfg, "--out", d.string(), "--mode", "analog"}) == 0);
  CHECK(run_cli({"calibrate", "--config", cfg, "--out", d.string()}) == cli::kEstimation);
}

TEST_CASE("exit codes") {
  const fs::path d = fresh_dir("codes");
  const std::string cfg = write_config(d, kSmallConfig).string();

  SUBCASE("usage") {
    CHECK(run_cli({}) == cli::kUsage);
    CHECK(run_cli({"frobnicate"}) == cli::kUsage);
    CHECK(run_cli({"simulate", "--mode", "bright"}) == cli::kUsage);
    CHECK(run_cli({"simulate", "--bogus"}) == cli::kUsage);
  }
  SUBCASE("bad config") {
    const std::string bad = write_config(d, R"({"unknown": 1})").string();
    CHECK(run_cli({"simulate", "--config", bad, "--out", d.string()}) == cli::kUsage);
    CHECK(run_cli({"simulate", "--config", (d / "absent.json").string()}) == cli::kUsage);
  }
  SUBCASE("bright counting run violates the low-illumination contract") {
    const std::string bright = write_config(d, R"({"source": {"width": 16, "height": 16, "mean_per_mode": 0.01}, "regions": {"width": 8, "height": 8}})").string();
    CHECK(run_cli({"simulate", "--config", bright, "--out", d.string(), "--mode", "counting"}) == cli::kContract);
  }
  SUBCASE("corrupt and truncated stacks") {
    REQUIRE(run_cli({"simulate", "--config", cfg, "--out", d.string(), "--mode", "dark"}) == 0);
    std::string bytes = read_file(d / "dark.emf");
    std::string magic = bytes;
    magic[1] = 'Z';
    write_file(d / "bad.emf", magic);
    CHECK(run_cli({"fit", "--dark", (d / "bad.emf").string(), "--out", d.string()}) == cli::kIo);
    write_file(d / "short.emf", bytes.substr(0, bytes.size() / 2));
    CHECK(run_cli({"fit", "--dark", (d / "short.emf").string(), "--out", d.string()}) == cli::kIo);
    CHECK(run_cli({"fit", "--dark", (d / "absent.emf").string(), "--out", d.string()}) == cli::kIo);
  }
  SUBCASE("sweep grids") {
    REQUIRE(run_cli({"simulate", "--config", cfg, "--out", d.string(), "--mode", "dark"}) == 0);
    REQUIRE(run_cli({"simulate", "--config", cfg, "--out", d.string(), "--mode", "counting"}) == 0);
    REQUIRE(run_cli({"fit", "--config", cfg, "--out", d.string()}) == 0);
    const std::string empty = write_config(d, R"({"source": {"width": 64, "height": 64}, "regions": {"width": 40, "height": 40}, "threshold_grid": []})").string();
    CHECK(run_cli({"sweep", "--config", empty, "--out", d.string()}) == cli::kUsage);
    const std::string low = write_config(d, R"({"source": {"width": 64, "height": 64, "frames": {"dark": 40, "analog": 200, "counting": 200}},
        "regions": {"width": 40, "height": 40, "tile": 10}, "threshold_grid": [520, 530, 540]})").string();
    REQUIRE(run_cli({"sweep", "--config", low, "--out", d.string()}) == cli::kOk);
    const auto curve = read_curve_csv(d / "curve.csv");
    REQUIRE(curve.points.size() == 3);
    for (const auto& p : curve.points) CHECK(p.below_validity);
  }
}

TEST_CASE("compare detects a model mismatch and refuses zero uncertainties") {
  const fs::path d = fresh_dir("compare");
  EmccdParams truth;
  EmccdParams wrong = truth;
  wrong.gain = 100.0;
  CalibrationCurve good, bad;
  for (double t = 600; t <= 900; t += 20) {
    CurvePoint p;
    p.threshold = t;
    p.eta_predicted = predicted_efficiency({t}, truth);
    p.eta_measured = p.eta_predicted * (1.0 + (static_cast<int>(t) % 40 == 0 ? 0.01 : -0.01));
    p.eta_uncertainty = 0.01 * p.eta_predicted;
    p.noise_predicted = predicted_noise_click_rate({t}, truth);
    p.noise_measured = p.noise_predicted;
    p.noise_uncertainty = 0.05 * p.noise_predicted + 1e-9;
    p.eta_scale_uncertainty = 0.037;
    good.points.push_back(p);
    p.eta_predicted = predicted_efficiency({t}, wrong);
    bad.points.push_back(p);
  }
  write_curve_csv(good, d / "good.csv");
  write_curve_csv(bad, d / "bad.csv");
  CHECK(run_cli({"compare", "--curve", (d / "good.csv").string()}) == cli::kOk);
  const auto report = nlohmann::json::parse(read_file(d / "compare.json"));
  CHECK(report["eta"]["reduced_chi2"].get<double>() == doctest::Approx(1.0).epsilon(0.1));
  CHECK(run_cli({"compare", "--curve", (d / "bad.csv").string()}) == cli::kDisagreement);

  good.points[3].eta_uncertainty = 0.0;
  write_curve_csv(good, d / "zero.csv");
  CHECK(run_cli({"compare", "--curve", (d / "zero.csv").string()}) == cli::kUsage);
  write_file(d / "garbage.csv", "T,x\n1,2\n");
  CHECK(run_cli({"compare", "--curve", (d / "garbage.csv").string()}) == cli::kUsage);
}

TEST_CASE("compare treats noise points as nested tails of one pixel set") {
  // Each replicate: N iid pixels, pixel exceeds T_i when u < q_i. The
  // correlated chi-square then has mean n and standard deviation sqrt(2n).
  const fs::path d = fresh_dir("compare_nested");
  EmccdParams truth;
  std::vector<double> thresholds;
  for (double t = 560; t <= 900; t += 20) thresholds.push_back(t);
  const double pixels = 200000;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> reduced;
  for (int rep = 0; rep < 60; ++rep) {
    std::vector<double> q, hits(thresholds.size(), 0.0);
    for (double t : thresholds) q.push_back(predicted_noise_click_rate({t}, truth));
    for (int k = 0; k < static_cast<int>(pixels); ++k) {
      const double u = u01(rng);
      for (std::size_t i = 0; i < q.size() && u < q[i]; ++i) hits[i] += 1.0;
    }
    CalibrationCurve c;
    for (std::size_t i = 0; i < q.size(); ++i) {
      CurvePoint p;
      p.threshold = thresholds[i];
      p.eta_measured = p.eta_uncertainty = std::nan("");
      p.noise_predicted = q[i];
      p.noise_measured = hits[i] / pixels;
      p.noise_uncertainty = std::sqrt(p.noise_measured * (1.0 - p.noise_measured) / pixels);
      c.points.push_back(p);
    }
    write_curve_csv(c, d / "curve.csv");
    run_cli({"compare", "--curve", (d / "curve.csv").string()});
    const auto report = nlohmann::json::parse(read_file(d / "compare.json"));
    reduced.push_back(report["noise"]["reduced_chi2"].get<double>());
  }
  double mean = 0, var = 0;
  for (double r : reduced) mean += r / reduced.size();
  for (double r : reduced) var += (r - mean) * (r - mean) / (reduced.size() - 1);
  const double n = static_cast<double>(thresholds.size());
  const double sd_expected = std::sqrt(2.0 / n);
  INFO("mean " << mean << " sd " << std::sqrt(var));
  CHECK(std::abs(mean - 1.0) < 4.0 * sd_expected / std::sqrt(60.0));
  CHECK(std::sqrt(var) == doctest::Approx(sd_expected).epsilon(0.35));
}
