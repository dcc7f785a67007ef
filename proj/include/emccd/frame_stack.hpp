#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace emccd {

enum class FrameKind : std::uint8_t { photoelectrons, counts, clicks };

std::string_view to_string(FrameKind kind) noexcept;

/// Frame-major stack of row-major 2-D pixel arrays.
class FrameStack {
 public:
  FrameStack() = default;
  FrameStack(std::size_t width, std::size_t height, std::size_t frames, FrameKind kind);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t frames() const noexcept { return frames_; }
  std::size_t pixels_per_frame() const noexcept { return width_ * height_; }
  FrameKind kind() const noexcept { return kind_; }

  std::span<std::uint32_t> frame(std::size_t index);
  std::span<const std::uint32_t> frame(std::size_t index) const;

  std::span<std::uint32_t> data() noexcept { return data_; }
  std::span<const std::uint32_t> data() const noexcept { return data_; }

  /// Checks value ranges for the kind: clicks are 0/1, counts fit 16 bits.
  void validate() const;

  bool operator==(const FrameStack&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t frames_ = 0;
  FrameKind kind_ = FrameKind::counts;
  std::vector<std::uint32_t> data_;
};

}  // namespace emccd
