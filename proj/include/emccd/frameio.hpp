#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "emccd/calibration.hpp"
#include "emccd/frame_stack.hpp"

// EMF1 frame-stack files and the curve CSV table.
//
// EMF1 layout (little-endian): "EMF1", u16 version = 1, u16 dtype
// (0 = u16 counts, 1 = u8 clicks, 2 = u32 photoelectrons), u32 width,
// u32 height, u32 n_frames, then the frame-major, row-major payload. The
// header is 20 bytes.

namespace emccd {

inline constexpr std::size_t kEmf1HeaderSize = 20;
inline constexpr std::uint16_t kEmf1Version = 1;

/// Recorded in the `<path>.meta.json` sidecar next to every stack.
struct StackProvenance {
  std::uint64_t seed = 0;
  std::string parameters_json = "{}";  ///< JSON object text of the generating parameters
};

std::string encode_stack(const FrameStack& stack);
/// Throws bad-magic, truncated-payload, unsupported-version,
/// unsupported-dtype or size-mismatch (trailing bytes).
FrameStack decode_stack(std::string_view bytes);

/// Writes the stack and its sidecar. Throws io-error.
void write_stack(const FrameStack& stack, const std::filesystem::path& path,
                 const StackProvenance& provenance = {});
FrameStack read_stack(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& stack_path);

/// Header of the curve table. Extra columns follow the first seven.
inline constexpr const char* kCurveCsvHeader =
    "T,eta_meas,eta_err,eta_pred,noise_meas,noise_err,noise_pred,"
    "eta_pred_err,noise_pred_err,eta_scale_err,below_validity,eta_corr";

/// Shortest round-trip decimal representation ("nan", "inf" for non-finite).
std::string format_double(double v);
double parse_double(std::string_view text);

std::string encode_curve_csv(const CalibrationCurve& curve);
/// Accepts files holding at least the seven standard columns; missing extra
/// columns default to 0 / false. Throws parse-error.
CalibrationCurve decode_curve_csv(std::string_view text);

void write_curve_csv(const CalibrationCurve& curve, const std::filesystem::path& path);
CalibrationCurve read_curve_csv(const std::filesystem::path& path);

/// Whole-file helpers. Throw io-error.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace emccd
