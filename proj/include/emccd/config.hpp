#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "emccd/params.hpp"
#include "emccd/region.hpp"
#include "emccd/source.hpp"

// Run configuration read from JSON. Top-level keys: detector, source, seed,
// regions, threshold_grid, output_dir. Unknown keys are rejected at every
// level; missing keys take the defaults below.

namespace emccd {

struct FrameCounts {
  std::size_t dark = 35;
  std::size_t analog = 35;
  std::size_t counting = 35;
};

/// Correlated areas: a rect in beam 1 (centred when x/y are absent) split
/// into tiles, each paired with its point reflection in beam 2. A positive
/// beam2_margin shrinks every beam-2 tile by that many pixels per side.
struct RegionSpec {
  bool centered = true;
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 100;
  std::size_t height = 100;
  std::size_t tile = 0;  ///< 0: one pair covering the whole rect
  std::size_t beam2_margin = 0;
};

struct RunConfig {
  EmccdParams detector;
  SourceParams source;  ///< counting-regime (dim) illumination
  FrameCounts frames;
  int analog_modes_per_pair = 1000;
  double analog_mean_per_mode = 0.00926;
  std::uint64_t seed = 1;
  RegionSpec regions;
  std::vector<Threshold> threshold_grid;
  std::string output_dir = ".";

  /// Bright illumination for the analog run.
  SourceParams analog_source() const;
  /// Dim illumination for the counting run.
  SourceParams counting_source() const;
  std::vector<RegionPair> region_pairs() const;
};

/// Throws config-parse-error with a message naming the offending key.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON of the configuration (used as provenance).
std::string to_json(const RunConfig& config);

}  // namespace emccd
