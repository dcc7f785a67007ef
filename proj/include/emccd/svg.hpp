#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "emccd/calibration.hpp"
#include "emccd/histogram.hpp"

// Dependency-free SVG plots: measured points with error bars and a predicted
// line, optionally on a logarithmic y axis.

namespace emccd {

struct SvgOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 480;
};

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  double error = 0.0;
};

/// Measured markers (with error bars when error > 0) and an optional line.
/// Throws empty-data when there are no finite points to draw.
std::string svg_plot(const std::vector<PlotPoint>& measured, const std::vector<PlotPoint>& predicted,
                     const SvgOptions& options);

enum class CurveQuantity { efficiency, noise };

std::string svg_curve(const CalibrationCurve& curve, CurveQuantity quantity,
                      const SvgOptions& options);

/// Bin counts as markers; `model` (expected counts at a bin centre) as a line.
std::string svg_histogram(const Histogram& hist, const SvgOptions& options,
                          const std::function<double(double)>& model = {});

void render_svg(const CalibrationCurve& curve, CurveQuantity quantity,
                const std::filesystem::path& path, const SvgOptions& options);
void render_svg(const Histogram& hist, const std::filesystem::path& path,
                const SvgOptions& options, const std::function<double(double)>& model = {});

}  // namespace emccd
