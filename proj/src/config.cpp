#include "linetrace/config.hpp"

#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "linetrace/error.hpp"
#include "text_format.hpp"

namespace linetrace {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct KeyDef {
  std::string_view name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string num(double v) { return text::format_exact(v); }

HsvPixel parse_hsv(std::string_view v, std::string_view key) {
  const auto c = text::parse_doubles(v, 3, key);
  for (double x : c) {
    if (x < 0 || x > 255 || x != std::floor(x)) {
      throw Error(ErrorKind::kParse, std::string(key) + " components must be integers in [0,255]");
    }
  }
  return {static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]),
          static_cast<std::uint8_t>(c[2])};
}

std::string hsv_str(HsvPixel p) {
  return std::to_string(p.h) + " " + std::to_string(p.s) + " " + std::to_string(p.v);
}

int parse_i(std::string_view v, std::string_view key) {
  const long long x = text::parse_int(v, key);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw Error(ErrorKind::kParse, std::string(key) + " out of range");
  }
  return static_cast<int>(x);
}

#define LT_DOUBLE_KEY(NAME, FIELD)                                            \
  KeyDef {                                                                    \
    NAME, [](RunConfig& c, std::string_view v) { c.FIELD = text::parse_double(v, NAME); }, \
        [](const RunConfig& c) { return num(c.FIELD); }                       \
  }
#define LT_INT_KEY(NAME, FIELD)                                               \
  KeyDef {                                                                    \
    NAME, [](RunConfig& c, std::string_view v) { c.FIELD = parse_i(v, NAME); }, \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }            \
  }

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      {"world", [](RunConfig& c, std::string_view v) { c.world = std::string(v); },
       [](const RunConfig& c) { return c.world; }},
      {"detection.hsv_lower",
       [](RunConfig& c, std::string_view v) { c.detection.hsv.lower = parse_hsv(v, "detection.hsv_lower"); },
       [](const RunConfig& c) { return hsv_str(c.detection.hsv.lower); }},
      {"detection.hsv_upper",
       [](RunConfig& c, std::string_view v) { c.detection.hsv.upper = parse_hsv(v, "detection.hsv_upper"); },
       [](const RunConfig& c) { return hsv_str(c.detection.hsv.upper); }},
      LT_INT_KEY("detection.morph_half_width", detection.morphology.half_width),
      LT_DOUBLE_KEY("detection.canny_low", detection.canny.low_threshold),
      LT_DOUBLE_KEY("detection.canny_high", detection.canny.high_threshold),
      LT_DOUBLE_KEY("detection.canny_blur_sigma", detection.canny.blur_sigma),
      LT_DOUBLE_KEY("detection.hough_rho", detection.hough.rho_resolution),
      {"detection.hough_theta_deg",
       [](RunConfig& c, std::string_view v) {
         c.detection.hough.theta_resolution =
             text::parse_double(v, "detection.hough_theta_deg") * kDeg;
       },
       [](const RunConfig& c) {
         return text::format_sig(c.detection.hough.theta_resolution / kDeg, 15);
       }},
      LT_INT_KEY("detection.hough_threshold", detection.hough.vote_threshold),
      LT_INT_KEY("detection.hough_min_line_length", detection.hough.min_line_length),
      LT_INT_KEY("detection.hough_max_line_gap", detection.hough.max_line_gap),
      LT_DOUBLE_KEY("tracker.q", tracker.q),
      LT_DOUBLE_KEY("tracker.r_x", tracker.r_x),
      LT_DOUBLE_KEY("tracker.r_y", tracker.r_y),
      LT_DOUBLE_KEY("tracker.p0_pos", tracker.p0_pos),
      LT_DOUBLE_KEY("tracker.p0_vel", tracker.p0_vel),
      LT_INT_KEY("tracker.max_coast", tracker.max_coast),
      LT_DOUBLE_KEY("nav.forward_speed", nav.forward_speed),
      LT_DOUBLE_KEY("nav.yaw_rate", nav.yaw_rate),
      LT_DOUBLE_KEY("nav.search_yaw_rate", nav.search_yaw_rate),
      LT_DOUBLE_KEY("nav.deadband_fraction", nav.deadband_fraction),
      LT_DOUBLE_KEY("nav.target_altitude", nav.target_altitude),
      LT_DOUBLE_KEY("nav.altitude_gain", nav.altitude_gain),
      LT_DOUBLE_KEY("nav.max_climb_rate", nav.max_climb_rate),
      LT_DOUBLE_KEY("sim.dt", sim.dt),
      LT_DOUBLE_KEY("sim.duration_max", sim.duration_max),
      LT_DOUBLE_KEY("sim.velocity_time_constant", sim.velocity_time_constant),
      LT_DOUBLE_KEY("sim.pixel_noise_sigma", sim.pixel_noise_sigma),
      {"sim.rng_seed",
       [](RunConfig& c, std::string_view v) {
         const long long s = text::parse_int(v, "sim.rng_seed");
         if (s < 0) {
           throw Error(ErrorKind::kParse, "sim.rng_seed must be >= 0");
         }
         c.sim.rng_seed = static_cast<std::uint64_t>(s);
       },
       [](const RunConfig& c) { return std::to_string(c.sim.rng_seed); }},
      {"sim.deterministic",
       [](RunConfig& c, std::string_view v) { c.deterministic = text::parse_bool(v, "sim.deterministic"); },
       [](const RunConfig& c) { return std::string(c.deterministic ? "true" : "false"); }},
      LT_INT_KEY("camera.width", camera.image_width),
      LT_INT_KEY("camera.height", camera.image_height),
      {"camera.vfov_deg",
       [](RunConfig& c, std::string_view v) {
         c.camera.vertical_fov = text::parse_double(v, "camera.vfov_deg") * kDeg;
       },
       [](const RunConfig& c) { return text::format_sig(c.camera.vertical_fov / kDeg, 15); }},
      {"camera.pitch_deg",
       [](RunConfig& c, std::string_view v) {
         c.camera.pitch = text::parse_double(v, "camera.pitch_deg") * kDeg;
       },
       [](const RunConfig& c) { return text::format_sig(c.camera.pitch / kDeg, 15); }},
      {"output.dir",
       [](RunConfig& c, std::string_view v) { c.outputs.dir = std::string(v); },
       [](const RunConfig& c) { return c.outputs.dir.string(); }},
      LT_INT_KEY("output.frame_stride", outputs.frame_stride),
      {"output.plots",
       [](RunConfig& c, std::string_view v) { c.outputs.plots = text::parse_bool(v, "output.plots"); },
       [](const RunConfig& c) { return std::string(c.outputs.plots ? "true" : "false"); }},
  };
  return table;
}

#undef LT_DOUBLE_KEY
#undef LT_INT_KEY

}  // namespace

void RunConfig::validate() const {
  if (world.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "world must name env1, env2 or a file");
  }
  detection.validate();
  TrackerConfig t = tracker;
  t.dt = sim.dt;
  t.validate();
  nav.validate();
  sim.validate();
  camera.validate();
  if (outputs.frame_stride < 0) {
    throw Error(ErrorKind::kInvalidArgument, "output.frame_stride must be >= 0");
  }
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& def : key_table()) {
    if (def.name == key) {
      def.set(cfg, text::trim(value));
      return;
    }
  }
  throw Error(ErrorKind::kParse, "unknown configuration key '" + std::string(key) + "'");
}

RunConfig parse_run_config(std::string_view source,
                           const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::set<std::string> seen;
  for (const auto& e : text::parse_entries(source)) {
    const std::string key = e.section.empty() ? e.key : e.section + "." + e.key;
    if (!seen.insert(key).second) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(e.line) +
                                         ": duplicate key '" + key + "'");
    }
    try {
      set_config_value(cfg, key, e.value);
    } catch (const Error& err) {
      throw Error(ErrorKind::kParse,
                  "line " + std::to_string(e.line) + ": " + err.what());
    }
  }
  if (cfg.world != "env1" && cfg.world != "env2") {
    std::filesystem::path p(cfg.world);
    if (p.is_relative() && !base_dir.empty()) {
      cfg.world = (base_dir / p).lexically_normal().string();
    }
  }
  cfg.tracker.dt = cfg.sim.dt;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string source = text::read_file(path);
  RunConfig cfg = parse_run_config(source, path.parent_path());
  if (cfg.world != "env1" && cfg.world != "env2" &&
      !std::filesystem::exists(cfg.world)) {
    throw Error(ErrorKind::kIo, "world file '" + cfg.world + "' not found");
  }
  return cfg;
}

std::string format_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  for (const auto& def : key_table()) {
    out << def.name << " = " << def.get(cfg) << "\n";
  }
  return out.str();
}

WorldSpec resolve_world(const RunConfig& cfg) {
  if (cfg.world == "env1" || cfg.world == "env2") {
    return build_environment(cfg.world);
  }
  return load_world_file(cfg.world);
}

}  // namespace linetrace
