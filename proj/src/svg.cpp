#include "emccd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "emccd/error.hpp"
#include "emccd/frameio.hpp"

namespace emccd {

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Roughly five "nice" ticks covering [lo, hi].
std::vector<double> linear_ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) ticks.push_back(t);
  return ticks;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
};

}  // namespace

std::string svg_plot(const std::vector<PlotPoint>& measured, const std::vector<PlotPoint>& predicted,
                     const SvgOptions& options) {
  const bool log_y = options.log_y;
  const auto usable = [log_y](const PlotPoint& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && (!log_y || p.y > 0.0);
  };
  Range xr, yr;
  std::size_t n_usable = 0;
  for (const auto& p : measured) {
    if (!usable(p)) continue;
    ++n_usable;
    xr.include(p.x);
    const double e = std::isfinite(p.error) ? std::abs(p.error) : 0.0;
    yr.include(p.y + e);
    yr.include(log_y && p.y - e <= 0.0 ? p.y : p.y - e);
  }
  for (const auto& p : predicted) {
    if (!usable(p)) continue;
    ++n_usable;
    xr.include(p.x);
    yr.include(p.y);
  }
  require(n_usable > 0, ErrorCode::empty_data, "nothing to plot");
  if (xr.hi == xr.lo) {
    xr.lo -= 1.0;
    xr.hi += 1.0;
  }
  double ylo, yhi;
  std::vector<double> yticks;
  if (log_y) {
    ylo = std::floor(std::log10(yr.lo));
    yhi = std::ceil(std::log10(yr.hi));
    if (yhi == ylo) yhi += 1.0;
    for (double d = ylo; d <= yhi; d += 1.0) yticks.push_back(d);
  } else {
    const double pad = yr.hi > yr.lo ? 0.05 * (yr.hi - yr.lo) : 1.0;
    ylo = yr.lo - pad;
    yhi = yr.hi + pad;
    yticks = linear_ticks(ylo, yhi);
  }

  const double left = 80, right = 20, top = 40, bottom = 60;
  const double pw = options.width - left - right;
  const double ph = options.height - top - bottom;
  const auto sx = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto sy = [&](double y) {
    const double v = log_y ? std::log10(y) : y;
    return top + (yhi - v) / (yhi - ylo) * ph;
  };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
       std::to_string(options.width) + "\" height=\"" + std::to_string(options.height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(options.width) + "\" height=\"" +
       std::to_string(options.height) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" +
       escape(options.title) + "</text>\n";
  s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" +
       num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : linear_ticks(xr.lo, xr.hi)) {
    const double x = sx(t);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(x) + "\" y2=\"" +
         num(top + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(top + ph + 20) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + tick_label(t) + "</text>\n";
  }
  for (double t : yticks) {
    const double y = top + (yhi - t) / (yhi - ylo) * ph;
    const std::string label = log_y ? "1e" + tick_label(t) : tick_label(t);
    s += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) + "\" y2=\"" +
         num(y) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) +
         "\" text-anchor=\"end\" font-size=\"12\">" + label + "</text>\n";
  }
  s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(options.height - 15.0) +
       "\" text-anchor=\"middle\" font-size=\"14\">" + escape(options.x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" font-size=\"14\" " +
       "transform=\"rotate(-90 18 " + num(top + ph / 2) + ")\">" + escape(options.y_label) +
       "</text>\n";

  std::string line;
  for (const auto& p : predicted) {
    if (!usable(p)) continue;
    line += (line.empty() ? "" : " ") + num(sx(p.x)) + "," + num(sy(p.y));
  }
  if (!line.empty())
    s += "<polyline class=\"predicted\" fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" points=\"" +
         line + "\"/>\n";

  s += "<g class=\"measured\" fill=\"blue\" stroke=\"blue\">\n";
  for (const auto& p : measured) {
    if (!usable(p)) continue;
    const double x = sx(p.x);
    const double e = std::isfinite(p.error) ? std::abs(p.error) : 0.0;
    if (e > 0.0) {
      const double y_top = sy(p.y + e);
      const double y_bot = log_y && p.y - e <= 0.0 ? top + ph : sy(p.y - e);
      s += "<line x1=\"" + num(x) + "\" y1=\"" + num(y_top) + "\" x2=\"" + num(x) + "\" y2=\"" +
           num(y_bot) + "\"/>\n";
    }
    s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(sy(p.y)) + "\" r=\"2.5\"/>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

std::string svg_curve(const CalibrationCurve& curve, CurveQuantity quantity,
                      const SvgOptions& options) {
  std::vector<PlotPoint> measured, predicted;
  for (const auto& p : curve.points) {
    if (quantity == CurveQuantity::efficiency) {
      measured.push_back({p.threshold, p.eta_measured, p.eta_uncertainty});
      predicted.push_back({p.threshold, p.eta_predicted, 0.0});
    } else {
      measured.push_back({p.threshold, p.noise_measured, p.noise_uncertainty});
      predicted.push_back({p.threshold, p.noise_predicted, 0.0});
    }
  }
  return svg_plot(measured, predicted, options);
}

std::string svg_histogram(const Histogram& hist, const SvgOptions& options,
                          const std::function<double(double)>& model) {
  std::vector<PlotPoint> measured, predicted;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    const double c = static_cast<double>(hist.counts[i]);
    if (c > 0.0) measured.push_back({hist.center(i), c, std::sqrt(c)});
    if (model) predicted.push_back({hist.center(i), model(hist.center(i)), 0.0});
  }
  return svg_plot(measured, predicted, options);
}

void render_svg(const CalibrationCurve& curve, CurveQuantity quantity,
                const std::filesystem::path& path, const SvgOptions& options) {
  write_file(path, svg_curve(curve, quantity, options));
}

void render_svg(const Histogram& hist, const std::filesystem::path& path,
                const SvgOptions& options, const std::function<double(double)>& model) {
  write_file(path, svg_histogram(hist, options, model));
}

}  // namespace emccd
