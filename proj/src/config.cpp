#include "emccd/config.hpp"

#include <cmath>
#include <initializer_list>
#include <json.hpp>

#include "emccd/error.hpp"
#include "emccd/frameio.hpp"

namespace emccd {

namespace {

using Json = nlohmann::json;

void only_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  require(j.is_object(), ErrorCode::config_parse, std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : keys) known = known || key == k;
    require(known, ErrorCode::config_parse,
            "unknown key '" + key + "' in " + std::string(where));
  }
}

double get_number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  require(j[key].is_number(), ErrorCode::config_parse, std::string(key) + " must be a number");
  return j[key].get<double>();
}

std::uint64_t get_unsigned(const Json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  require(j[key].is_number_unsigned() || (j[key].is_number_integer() && j[key].get<std::int64_t>() >= 0),
          ErrorCode::config_parse, std::string(key) + " must be a non-negative integer");
  return j[key].get<std::uint64_t>();
}

void parse_detector(const Json& j, EmccdParams& d) {
  only_keys(j, "detector", {"g", "g_sc", "p_sc", "mu", "sigma", "eta0"});
  d.gain = get_number(j, "g", d.gain);
  d.cic_gain = get_number(j, "g_sc", d.cic_gain);
  d.cic_prob = get_number(j, "p_sc", d.cic_prob);
  d.bias = get_number(j, "mu", d.bias);
  d.read_noise = get_number(j, "sigma", d.read_noise);
  d.analog_efficiency = get_number(j, "eta0", d.analog_efficiency);
}

void parse_source(const Json& j, RunConfig& c) {
  only_keys(j, "source",
            {"modes_per_pair", "mean_per_mode", "eta1", "eta2", "crosstalk", "width", "height",
             "frames", "analog_modes_per_pair", "analog_mean_per_mode"});
  auto& s = c.source;
  s.modes_per_pair = static_cast<int>(get_unsigned(j, "modes_per_pair", s.modes_per_pair));
  s.mean_per_mode = get_number(j, "mean_per_mode", s.mean_per_mode);
  s.eta1 = get_number(j, "eta1", s.eta1);
  s.eta2 = get_number(j, "eta2", s.eta2);
  s.crosstalk = get_number(j, "crosstalk", s.crosstalk);
  s.width = get_unsigned(j, "width", s.width);
  s.height = get_unsigned(j, "height", s.height);
  c.analog_modes_per_pair =
      static_cast<int>(get_unsigned(j, "analog_modes_per_pair", c.analog_modes_per_pair));
  c.analog_mean_per_mode = get_number(j, "analog_mean_per_mode", c.analog_mean_per_mode);
  if (j.contains("frames")) {
    const Json& f = j["frames"];
    if (f.is_object()) {
      only_keys(f, "source.frames", {"dark", "analog", "counting"});
      c.frames.dark = get_unsigned(f, "dark", c.frames.dark);
      c.frames.analog = get_unsigned(f, "analog", c.frames.analog);
      c.frames.counting = get_unsigned(f, "counting", c.frames.counting);
    } else {
      const auto n = get_unsigned(j, "frames", 35);
      c.frames = {n, n, n};
    }
  }
  s.frames = c.frames.counting;
}

void parse_regions(const Json& j, RegionSpec& r) {
  only_keys(j, "regions", {"x", "y", "width", "height", "tile", "beam2_margin"});
  require(j.contains("x") == j.contains("y"), ErrorCode::config_parse,
          "regions needs both x and y or neither");
  r.centered = !j.contains("x");
  r.x = get_unsigned(j, "x", 0);
  r.y = get_unsigned(j, "y", 0);
  r.width = get_unsigned(j, "width", r.width);
  r.height = get_unsigned(j, "height", r.height);
  r.tile = get_unsigned(j, "tile", r.tile);
  r.beam2_margin = get_unsigned(j, "beam2_margin", r.beam2_margin);
}

std::vector<Threshold> parse_grid(const Json& j) {
  std::vector<Threshold> grid;
  if (j.is_array()) {
    for (const auto& v : j) {
      require(v.is_number(), ErrorCode::config_parse, "threshold_grid entries must be numbers");
      grid.push_back({v.get<double>()});
    }
    return grid;
  }
  only_keys(j, "threshold_grid", {"start", "stop", "step"});
  require(j.contains("start") && j.contains("stop") && j.contains("step"), ErrorCode::config_parse,
          "threshold_grid needs start, stop and step");
  const double start = get_number(j, "start", 0);
  const double stop = get_number(j, "stop", 0);
  const double step = get_number(j, "step", 0);
  require(step > 0.0 && std::isfinite(start) && std::isfinite(stop), ErrorCode::config_parse,
          "threshold_grid step must be positive");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  require(stop >= start && n <= 100000, ErrorCode::config_parse, "bad threshold_grid range");
  for (std::size_t i = 0; i < n; ++i) grid.push_back({start + step * static_cast<double>(i)});
  return grid;
}

}  // namespace

SourceParams RunConfig::analog_source() const {
  SourceParams s = source;
  s.modes_per_pair = analog_modes_per_pair;
  s.mean_per_mode = analog_mean_per_mode;
  s.frames = frames.analog;
  return s;
}

SourceParams RunConfig::counting_source() const {
  SourceParams s = source;
  s.frames = frames.counting;
  return s;
}

std::vector<RegionPair> RunConfig::region_pairs() const {
  const std::size_t w = source.width, h = source.height;
  const Rect area = regions.centered ? centered_rect(regions.width, regions.height, w, h)
                                     : Rect{regions.x, regions.y, regions.width, regions.height};
  std::vector<RegionPair> pairs =
      regions.tile == 0 ? std::vector<RegionPair>{conjugate_region_pair(area, w, h)}
                        : tiled_region_pairs(area, regions.tile, regions.tile, w, h);
  if (regions.beam2_margin > 0) {
    const std::size_t m = regions.beam2_margin;
    const std::size_t tw = regions.tile == 0 ? area.width : regions.tile;
    const std::size_t th = regions.tile == 0 ? area.height : regions.tile;
    require(tw > 2 * m && th > 2 * m, ErrorCode::invalid_parameter,
            "beam2_margin leaves an empty beam-2 region");
    // Keep beam-2 pixels whose twins lie at least m pixels inside the tile.
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::size_t tiles_x = regions.tile == 0 ? 1 : area.width / regions.tile;
      const std::size_t tx = area.x + (i % tiles_x) * tw;
      const std::size_t ty = area.y + (i / tiles_x) * th;
      const Rect inner{tx + m, ty + m, tw - 2 * m, th - 2 * m};
      pairs[i].beam2 = conjugate_region_pair(inner, w, h).beam2;
    }
  }
  validate_region_pairs(pairs, w * h);
  return pairs;
}

RunConfig parse_run_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::exception& e) {
    fail(ErrorCode::config_parse, e.what());
  }
  only_keys(j, "config", {"detector", "source", "seed", "regions", "threshold_grid", "output_dir"});
  RunConfig c;
  try {
    if (j.contains("detector")) parse_detector(j["detector"], c.detector);
    if (j.contains("source")) parse_source(j["source"], c);
    c.seed = get_unsigned(j, "seed", c.seed);
    if (j.contains("regions")) parse_regions(j["regions"], c.regions);
    if (j.contains("threshold_grid")) c.threshold_grid = parse_grid(j["threshold_grid"]);
    if (j.contains("output_dir")) {
      require(j["output_dir"].is_string(), ErrorCode::config_parse, "output_dir must be a string");
      c.output_dir = j["output_dir"].get<std::string>();
    }
    c.detector.validate();
    c.source.validate();
    c.analog_source().validate();
    validate_region_pairs(c.region_pairs(), c.source.width * c.source.height);
  } catch (const Json::exception& e) {
    fail(ErrorCode::config_parse, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_parse) throw;
    fail(ErrorCode::config_parse, e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

std::string to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["detector"] = {{"g", c.detector.gain},       {"g_sc", c.detector.cic_gain},
                   {"p_sc", c.detector.cic_prob}, {"mu", c.detector.bias},
                   {"sigma", c.detector.read_noise}, {"eta0", c.detector.analog_efficiency}};
  j["source"] = {{"modes_per_pair", c.source.modes_per_pair},
                 {"mean_per_mode", c.source.mean_per_mode},
                 {"eta1", c.source.eta1},
                 {"eta2", c.source.eta2},
                 {"crosstalk", c.source.crosstalk},
                 {"width", c.source.width},
                 {"height", c.source.height},
                 {"frames", {{"dark", c.frames.dark}, {"analog", c.frames.analog}, {"counting", c.frames.counting}}},
                 {"analog_modes_per_pair", c.analog_modes_per_pair},
                 {"analog_mean_per_mode", c.analog_mean_per_mode}};
  j["seed"] = c.seed;
  nlohmann::ordered_json r;
  if (!c.regions.centered) {
    r["x"] = c.regions.x;
    r["y"] = c.regions.y;
  }
  r["width"] = c.regions.width;
  r["height"] = c.regions.height;
  r["tile"] = c.regions.tile;
  r["beam2_margin"] = c.regions.beam2_margin;
  j["regions"] = r;
  j["threshold_grid"] = nlohmann::ordered_json::array();
  for (auto t : c.threshold_grid) j["threshold_grid"].push_back(t.value);
  j["output_dir"] = c.output_dir;
  return j.dump(2);
}

}  // namespace emccd
