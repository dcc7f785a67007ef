#pragma once

#include <cstddef>
#include <vector>

namespace emccd {

/// Conjugate (twin) pixel of `index` in a width x height beam: the point
/// reflection through the grid centre.
inline std::size_t conjugate_pixel(std::size_t index, std::size_t width, std::size_t height) {
  const std::size_t x = index % width;
  const std::size_t y = index / width;
  return (height - 1 - y) * width + (width - 1 - x);
}

struct Rect {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 0;
  std::size_t height = 0;
};

/// Pixel masks (row-major indices within one frame) of two correlated areas,
/// one per beam.
struct RegionPair {
  std::vector<std::size_t> beam1;
  std::vector<std::size_t> beam2;
};

std::vector<std::size_t> rect_pixels(const Rect& rect, std::size_t frame_width,
                                     std::size_t frame_height);

/// `rect` in beam 1 and its point reflection in beam 2.
RegionPair conjugate_region_pair(const Rect& rect, std::size_t frame_width,
                                 std::size_t frame_height);

/// Splits `area` into tile_width x tile_height tiles (incomplete edge tiles
/// are dropped), each paired with its conjugate.
std::vector<RegionPair> tiled_region_pairs(const Rect& area, std::size_t tile_width,
                                           std::size_t tile_height, std::size_t frame_width,
                                           std::size_t frame_height);

/// Every `stride`-th pixel of `rect` in both directions, paired with the
/// conjugates. With stride >= 2 no two mask pixels are 8-neighbours.
RegionPair sublattice_region_pair(const Rect& rect, std::size_t stride, std::size_t frame_width,
                                  std::size_t frame_height);

/// Centred rect of the given size inside a frame.
Rect centered_rect(std::size_t width, std::size_t height, std::size_t frame_width,
                   std::size_t frame_height);

/// Throws empty-region / invalid-parameter when masks are empty or out of range.
void validate_region_pairs(const std::vector<RegionPair>& pairs, std::size_t pixels_per_frame);

}  // namespace emccd
