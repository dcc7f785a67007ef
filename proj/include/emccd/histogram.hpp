#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emccd/frame_stack.hpp"

namespace emccd {

/// Contiguous equal-width histogram of integer pixel values. Bin i covers the
/// integers [first_value + i w, first_value + (i + 1) w - 1]; its edges sit
/// half a count outside so continuous densities integrate over whole bins.
struct Histogram {
  double origin = 0.0;     ///< lower edge of bin 0
  double bin_width = 1.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  double lower_edge(std::size_t i) const noexcept { return origin + bin_width * i; }
  double upper_edge(std::size_t i) const noexcept { return origin + bin_width * (i + 1); }
  double center(std::size_t i) const noexcept { return origin + bin_width * (i + 0.5); }
  double span_end() const noexcept { return lower_edge(counts.size()); }
  std::vector<double> bin_edges() const;

  /// Value below which the given fraction of entries lies (bin-interpolated).
  double quantile(double fraction) const;
  /// Centre of the most populated bin.
  double mode() const;
};

Histogram build_histogram(std::span<const std::uint32_t> values, unsigned bin_width = 1);

/// Histogram over all frames of a counts stack. Throws empty-stack when the
/// stack holds no pixels.
Histogram build_histogram(const FrameStack& stack, unsigned bin_width = 1);

/// Histogram over frames [first, first + count).
Histogram build_histogram(const FrameStack& stack, std::size_t first, std::size_t count,
                          unsigned bin_width = 1);

}  // namespace emccd
