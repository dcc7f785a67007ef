#include "emccd/frame_stack.hpp"

#include <algorithm>
#include <string>

#include "emccd/error.hpp"

namespace emccd {

std::string_view to_string(FrameKind kind) noexcept {
  switch (kind) {
    case FrameKind::photoelectrons: return "photoelectrons";
    case FrameKind::counts: return "counts";
    case FrameKind::clicks: return "clicks";
  }
  return "unknown";
}

FrameStack::FrameStack(std::size_t width, std::size_t height, std::size_t frames, FrameKind kind)
    : width_(width), height_(height), frames_(frames), kind_(kind), data_(width * height * frames) {
  require(width > 0 && height > 0, ErrorCode::invalid_parameter, "frame dimensions must be positive");
}

std::span<std::uint32_t> FrameStack::frame(std::size_t index) {
  require(index < frames_, ErrorCode::invalid_parameter, "frame index out of range");
  return std::span<std::uint32_t>(data_).subspan(index * pixels_per_frame(), pixels_per_frame());
}

std::span<const std::uint32_t> FrameStack::frame(std::size_t index) const {
  require(index < frames_, ErrorCode::invalid_parameter, "frame index out of range");
  return std::span<const std::uint32_t>(data_).subspan(index * pixels_per_frame(),
                                                       pixels_per_frame());
}

void FrameStack::validate() const {
  require(data_.size() == width_ * height_ * frames_, ErrorCode::size_mismatch,
          "data length does not match the stack shape");
  const std::uint32_t limit = kind_ == FrameKind::clicks ? 1u
                              : kind_ == FrameKind::counts ? 65535u
                                                           : UINT32_MAX;
  const bool in_range = std::all_of(data_.begin(), data_.end(), [&](auto v) { return v <= limit; });
  require(in_range, ErrorCode::invalid_parameter,
          std::string("pixel value out of range for ") + std::string(to_string(kind_)) + " stack");
}

}  // namespace emccd
