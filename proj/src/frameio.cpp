#include "emccd/frameio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "emccd/error.hpp"

namespace emccd {

namespace {

std::uint16_t dtype_of(FrameKind kind) {
  switch (kind) {
    case FrameKind::counts: return 0;
    case FrameKind::clicks: return 1;
    case FrameKind::photoelectrons: return 2;
  }
  return 0xFFFF;
}

std::size_t bytes_per_value(std::uint16_t dtype) { return dtype == 0 ? 2 : dtype == 1 ? 1 : 4; }

void put_le(std::string& out, std::uint64_t v, std::size_t bytes) {
  for (std::size_t i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::string_view in, std::size_t offset, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string encode_stack(const FrameStack& stack) {
  stack.validate();
  require(stack.width() <= UINT32_MAX && stack.height() <= UINT32_MAX && stack.frames() <= UINT32_MAX,
          ErrorCode::invalid_parameter, "stack too large for EMF1");
  const std::uint16_t dtype = dtype_of(stack.kind());
  const std::size_t bpv = bytes_per_value(dtype);
  std::string out;
  out.reserve(kEmf1HeaderSize + stack.data().size() * bpv);
  out += "EMF1";
  put_le(out, kEmf1Version, 2);
  put_le(out, dtype, 2);
  put_le(out, stack.width(), 4);
  put_le(out, stack.height(), 4);
  put_le(out, stack.frames(), 4);
  for (std::uint32_t v : stack.data()) put_le(out, v, bpv);
  return out;
}

FrameStack decode_stack(std::string_view bytes) {
  const std::string_view magic = "EMF1";
  require(magic.starts_with(bytes.substr(0, 4)), ErrorCode::bad_magic, "not an EMF1 file");
  require(bytes.size() >= kEmf1HeaderSize, ErrorCode::truncated_payload, "header is truncated");
  const auto version = static_cast<std::uint16_t>(get_le(bytes, 4, 2));
  require(version == kEmf1Version, ErrorCode::unsupported_version,
          "EMF1 version " + std::to_string(version) + " is not supported");
  const auto dtype = static_cast<std::uint16_t>(get_le(bytes, 6, 2));
  require(dtype <= 2, ErrorCode::unsupported_dtype, "unknown dtype " + std::to_string(dtype));
  const std::uint64_t width = get_le(bytes, 8, 4);
  const std::uint64_t height = get_le(bytes, 12, 4);
  const std::uint64_t frames = get_le(bytes, 16, 4);
  require(width > 0 && height > 0, ErrorCode::size_mismatch, "zero frame dimension in header");
  const std::size_t bpv = bytes_per_value(dtype);
  // Each factor is below 2^32, so width * height fits; guard the rest.
  const std::uint64_t pixels = width * height;
  const std::uint64_t payload = bytes.size() - kEmf1HeaderSize;
  require(frames == 0 || pixels <= payload / bpv / frames, ErrorCode::truncated_payload,
          "payload shorter than the header declares");
  const std::uint64_t expected = pixels * frames * bpv;
  require(payload == expected, ErrorCode::size_mismatch, "payload longer than the header declares");

  const FrameKind kind =
      dtype == 0 ? FrameKind::counts : dtype == 1 ? FrameKind::clicks : FrameKind::photoelectrons;
  FrameStack stack(width, height, frames, kind);
  auto data = stack.data();
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = static_cast<std::uint32_t>(get_le(bytes, kEmf1HeaderSize + i * bpv, bpv));
  if (kind == FrameKind::clicks)
    require(std::all_of(data.begin(), data.end(), [](auto v) { return v <= 1; }),
            ErrorCode::invalid_parameter, "click stack holds values other than 0/1");
  return stack;
}

std::filesystem::path sidecar_path(const std::filesystem::path& stack_path) {
  return std::filesystem::path(stack_path.string() + ".meta.json");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  require(!in.bad(), ErrorCode::io_error, "cannot read " + path.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io_error, "cannot create " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  require(!out.fail(), ErrorCode::io_error, "cannot write " + path.string());
}

void write_stack(const FrameStack& stack, const std::filesystem::path& path,
                 const StackProvenance& provenance) {
  write_file(path, encode_stack(stack));
  nlohmann::ordered_json meta;
  meta["kind"] = std::string(to_string(stack.kind()));
  meta["seed"] = provenance.seed;
  meta["width"] = stack.width();
  meta["height"] = stack.height();
  meta["frames"] = stack.frames();
  try {
    meta["params"] = nlohmann::ordered_json::parse(provenance.parameters_json);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::invalid_parameter, std::string("provenance parameters are not JSON: ") + e.what());
  }
  write_file(sidecar_path(path), meta.dump(2) + "\n");
}

FrameStack read_stack(const std::filesystem::path& path) { return decode_stack(read_file(path)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  require(res.ec == std::errc() && res.ptr == text.data() + text.size() && !text.empty(),
          ErrorCode::parse_error, "not a number: '" + std::string(text) + "'");
  return v;
}

std::string encode_curve_csv(const CalibrationCurve& curve) {
  std::string out = kCurveCsvHeader;
  out += '\n';
  for (const auto& p : curve.points) {
    const double fields[] = {p.threshold,       p.eta_measured,          p.eta_uncertainty,
                             p.eta_predicted,   p.noise_measured,        p.noise_uncertainty,
                             p.noise_predicted, p.eta_pred_uncertainty,  p.noise_pred_uncertainty,
                             p.eta_scale_uncertainty};
    for (double f : fields) {
      out += format_double(f);
      out += ',';
    }
    out += p.below_validity ? "1" : "0";
    out += ',';
    out += format_double(p.eta_from_correlation);
    out += '\n';
  }
  return out;
}

CalibrationCurve decode_curve_csv(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  require(!lines.empty(), ErrorCode::parse_error, "empty CSV");
  const auto header = split(lines[0], ',');
  const auto expected = split(kCurveCsvHeader, ',');
  require(header.size() >= 7 && header.size() <= expected.size(), ErrorCode::parse_error,
          "unexpected CSV header");
  for (std::size_t i = 0; i < header.size(); ++i)
    require(header[i] == expected[i], ErrorCode::parse_error,
            "unexpected CSV column '" + std::string(header[i]) + "'");

  CalibrationCurve curve;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split(lines[li], ',');
    require(cells.size() == header.size(), ErrorCode::parse_error,
            "row " + std::to_string(li) + " has " + std::to_string(cells.size()) + " fields");
    std::vector<double> v(expected.size(), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == 10) {
        require(cells[i] == "0" || cells[i] == "1", ErrorCode::parse_error,
                "below_validity must be 0 or 1");
        v[i] = cells[i] == "1" ? 1.0 : 0.0;
      } else {
        v[i] = parse_double(cells[i]);
      }
    }
    CurvePoint p;
    p.threshold = v[0];
    p.eta_measured = v[1];
    p.eta_uncertainty = v[2];
    p.eta_predicted = v[3];
    p.noise_measured = v[4];
    p.noise_uncertainty = v[5];
    p.noise_predicted = v[6];
    p.eta_pred_uncertainty = v[7];
    p.noise_pred_uncertainty = v[8];
    p.eta_scale_uncertainty = v[9];
    p.below_validity = v[10] != 0.0;
    p.eta_from_correlation = header.size() > 11 ? v[11] : 0.0;
    curve.points.push_back(p);
  }
  return curve;
}

void write_curve_csv(const CalibrationCurve& curve, const std::filesystem::path& path) {
  write_file(path, encode_curve_csv(curve));
}

CalibrationCurve read_curve_csv(const std::filesystem::path& path) {
  return decode_curve_csv(read_file(path));
}

}  // namespace emccd
