#include "emccd/region.hpp"

#include <string>

#include "emccd/error.hpp"

namespace emccd {

std::vector<std::size_t> rect_pixels(const Rect& rect, std::size_t frame_width,
                                     std::size_t frame_height) {
  require(rect.width > 0 && rect.height > 0, ErrorCode::empty_region, "rectangle has no pixels");
  require(rect.x + rect.width <= frame_width && rect.y + rect.height <= frame_height,
          ErrorCode::invalid_parameter, "rectangle exceeds the frame");
  std::vector<std::size_t> pixels;
  pixels.reserve(rect.width * rect.height);
  for (std::size_t y = rect.y; y < rect.y + rect.height; ++y)
    for (std::size_t x = rect.x; x < rect.x + rect.width; ++x) pixels.push_back(y * frame_width + x);
  return pixels;
}

RegionPair conjugate_region_pair(const Rect& rect, std::size_t frame_width,
                                 std::size_t frame_height) {
  RegionPair pair;
  pair.beam1 = rect_pixels(rect, frame_width, frame_height);
  pair.beam2.reserve(pair.beam1.size());
  for (std::size_t p : pair.beam1) pair.beam2.push_back(conjugate_pixel(p, frame_width, frame_height));
  return pair;
}

std::vector<RegionPair> tiled_region_pairs(const Rect& area, std::size_t tile_width,
                                           std::size_t tile_height, std::size_t frame_width,
                                           std::size_t frame_height) {
  require(tile_width > 0 && tile_height > 0, ErrorCode::invalid_parameter,
          "tile size must be positive");
  std::vector<RegionPair> pairs;
  for (std::size_t ty = 0; ty + tile_height <= area.height; ty += tile_height)
    for (std::size_t tx = 0; tx + tile_width <= area.width; tx += tile_width)
      pairs.push_back(conjugate_region_pair({area.x + tx, area.y + ty, tile_width, tile_height},
                                            frame_width, frame_height));
  require(!pairs.empty(), ErrorCode::empty_region, "tile larger than the region");
  return pairs;
}

RegionPair sublattice_region_pair(const Rect& rect, std::size_t stride, std::size_t frame_width,
                                  std::size_t frame_height) {
  require(stride >= 1, ErrorCode::invalid_parameter, "stride must be positive");
  RegionPair pair;
  for (std::size_t p : rect_pixels(rect, frame_width, frame_height)) {
    const std::size_t x = p % frame_width - rect.x;
    const std::size_t y = p / frame_width - rect.y;
    if (x % stride != 0 || y % stride != 0) continue;
    pair.beam1.push_back(p);
    pair.beam2.push_back(conjugate_pixel(p, frame_width, frame_height));
  }
  return pair;
}

Rect centered_rect(std::size_t width, std::size_t height, std::size_t frame_width,
                   std::size_t frame_height) {
  require(width <= frame_width && height <= frame_height, ErrorCode::invalid_parameter,
          "region larger than the frame");
  return {(frame_width - width) / 2, (frame_height - height) / 2, width, height};
}

void validate_region_pairs(const std::vector<RegionPair>& pairs, std::size_t pixels_per_frame) {
  require(!pairs.empty(), ErrorCode::empty_region, "no region pairs");
  for (const auto& pair : pairs) {
    require(!pair.beam1.empty() && !pair.beam2.empty(), ErrorCode::empty_region,
            "region mask has no pixels");
    for (const auto* mask : {&pair.beam1, &pair.beam2})
      for (std::size_t p : *mask)
        require(p < pixels_per_frame, ErrorCode::invalid_parameter,
                "region pixel " + std::to_string(p) + " outside the frame");
  }
}

}  // namespace emccd
