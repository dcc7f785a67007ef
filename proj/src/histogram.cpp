#include "emccd/histogram.hpp"

#include <algorithm>

#include "emccd/error.hpp"

namespace emccd {

std::vector<double> Histogram::bin_edges() const {
  std::vector<double> edges(counts.size() + 1);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = lower_edge(i);
  return edges;
}

double Histogram::quantile(double fraction) const {
  require(total > 0, ErrorCode::empty_data, "quantile of an empty histogram");
  const double target = std::clamp(fraction, 0.0, 1.0) * static_cast<double>(total);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double next = cumulative + static_cast<double>(counts[i]);
    if (next >= target && counts[i] > 0)
      return lower_edge(i) + bin_width * (target - cumulative) / static_cast<double>(counts[i]);
    cumulative = next;
  }
  return span_end();
}

double Histogram::mode() const {
  require(total > 0, ErrorCode::empty_data, "mode of an empty histogram");
  const auto it = std::max_element(counts.begin(), counts.end());
  return center(static_cast<std::size_t>(it - counts.begin()));
}

Histogram build_histogram(std::span<const std::uint32_t> values, unsigned bin_width) {
  require(bin_width >= 1, ErrorCode::invalid_parameter, "bin width must be >= 1");
  require(!values.empty(), ErrorCode::empty_stack, "no pixel values to histogram");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  Histogram h;
  h.bin_width = bin_width;
  h.origin = static_cast<double>(*lo) - 0.5;
  h.counts.assign((*hi - *lo) / bin_width + 1, 0);
  for (std::uint32_t v : values) ++h.counts[(v - *lo) / bin_width];
  h.total = values.size();
  return h;
}

Histogram build_histogram(const FrameStack& stack, unsigned bin_width) {
  return build_histogram(stack, 0, stack.frames(), bin_width);
}

Histogram build_histogram(const FrameStack& stack, std::size_t first, std::size_t count,
                          unsigned bin_width) {
  require(count > 0 && stack.pixels_per_frame() > 0, ErrorCode::empty_stack,
          "cannot histogram an empty stack");
  require(first + count <= stack.frames(), ErrorCode::invalid_parameter, "frame range out of bounds");
  const std::size_t n = stack.pixels_per_frame();
  return build_histogram(stack.data().subspan(first * n, count * n), bin_width);
}

}  // namespace emccd
